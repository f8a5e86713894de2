#include <doctest.h>

#include <cmath>
#include <vector>

#include "hardy/decay_lab.hpp"
#include "hardy/errors.hpp"

using namespace hardy;

namespace {

const Dimension N3(3);
const Index kInf = Index::infinity();

HarmonicProfile h0_of(const PotentialSpec& s, double r_max = 1e6) {
  ProfileOptions o;
  o.r_max = r_max;
  return solve_profile(s, 0, o);
}

const char* kFull = R"(
[potential]
family = two_scale
N = 3
lambda1 = 3
lambda2 = -0.1875
[modes]
data = gaussian
radius = 0.5
k = 0, 1
amplitudes = 1, 0.5
[lorentz]
p = 1
q = inf
sigma = 1
theta = inf
ell = 1
[times]
t_min = 10
t_max = 1000
per_decade = 2
[solver]
grid_scale = 1.5
boundary = reflecting
[outputs]
dir = somewhere
prefix = x
)";

}  // namespace

TEST_SUITE("decay_lab") {
  TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(kFull);
    CHECK(c.potential.family == "two_scale");
    CHECK(c.potential.lambda2 == -0.1875);
    CHECK(c.data == DataFamily::Gaussian);
    CHECK(c.modes == std::vector<int>{0, 1});
    CHECK(c.amplitudes == std::vector<double>{1.0, 0.5});
    CHECK(c.quadruple.q.is_infinite());
    CHECK(c.ell == 1);
    CHECK(c.solver.boundary == Boundary::Reflecting);
    CHECK(c.solver.grid_scale == 1.5);
    const auto t = c.sample_times();
    REQUIRE(t.size() == 5);
    CHECK(t.front() == 10.0);
    CHECK(t[2] == doctest::Approx(100.0));
    CHECK(t.back() == 1000.0);
    const auto d = describe(c);
    CHECK(d.at("lorentz.q") == "inf");
    CHECK(d.at("lorentz.p") == "1");
    CHECK(d.at("outputs.prefix") == "x");
    CHECK(make_potential(c.potential).family == "two_scale");
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("[potential]\nlambda3 = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[extra]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[potential]\nN = 3.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[lorentz]\np = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[modes]\nk = 0, 1\namplitudes = 1, 2, 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[lorentz]\np = 2\nq = 1\n"), NotAdmissible);
    CHECK_THROWS_AS(parse_config("[lorentz]\nell = 2\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
    PotentialConfig bad;
    bad.family = "free";
    CHECK_THROWS_AS(make_potential(bad), ConfigError);
  }

  TEST_CASE("fit of synthetic decay") {
    std::vector<double> t, pure, logged;
    for (int i = 0; i <= 32; ++i) {
      const double s = std::pow(10.0, 2.0 + i / 16.0);
      t.push_back(s);
      pure.push_back(3.0 * std::pow(s, -1.5));
      logged.push_back(std::pow(s, -1.25) * std::pow(std::log(s), 0.7));
    }
    const PowerFit a = fit_decay(t, pure, 1e2, 1e4);
    CHECK(a.alpha == doctest::Approx(1.5).epsilon(1e-10));
    CHECK_FALSE(a.beta_significant);
    CHECK(a.beta == 0.0);
    CHECK(a.points == 33);
    const PowerFit b = fit_decay(t, logged, 1e2, 1e4);
    CHECK(b.beta_significant);
    CHECK(b.alpha == doctest::Approx(1.25).epsilon(1e-8));
    CHECK(b.beta == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(trend_slope(t, pure, 1e2, 1e4) == doctest::Approx(-1.5));
    CHECK(trend_slope(t, pure, 1e3, 1e4) == doctest::Approx(-1.5));
  }

  TEST_CASE("right-hand sides for the free Laplacian") {
    const HarmonicProfile h = h0_of(make_pure_hardy(0.0, N3), 1e3);
    const LorentzQuadruple x{Index(1.0), kInf, Index(1.0), kInf};
    for (double t : {0.5, 4.0, 100.0}) {
      CHECK(theorem_rhs(h, x, 0, 0, t) == doctest::Approx(2.0 * std::pow(t, -1.5)));
      CHECK(corollary_rhs(h, x, t) == doctest::Approx(std::pow(t, -1.5)));
    }
    const LorentzQuadruple y{Index(2.0), Index(4.0), Index(2.0), Index(4.0)};
    CHECK(corollary_rhs(h, y, 10.0) / corollary_rhs(h, y, 1.0) == doctest::Approx(std::pow(10.0, -0.375)));
  }

  TEST_CASE("time-derivative orders add powers of t") {
    const HarmonicProfile h = h0_of(make_two_scale(3.0, -3.0 / 16.0, N3));
    const LorentzQuadruple x{Index(1.0), kInf, Index(1.0), kInf};
    for (double t : {0.3, 7.0, 400.0}) {
      CHECK(theorem_rhs(h, x, 0, 0, t) / theorem_rhs(h, x, 0, 1, t) == doctest::Approx(t));
      CHECK(theorem_rhs(h, x, 0, 1, t) / theorem_rhs(h, x, 0, 3, t) == doctest::Approx(t * t));
    }
  }

  TEST_CASE("two-scale corollary rate approaches 5/4") {
    const HarmonicProfile h = h0_of(make_two_scale(3.0, -3.0 / 16.0, N3), 1e10);
    const LorentzQuadruple x{Index(1.0), kInf, Index(1.0), kInf};
    const double slope = std::log(corollary_rhs(h, x, 1e8) / corollary_rhs(h, x, 1e7)) / std::log(10.0);
    CHECK(slope == doctest::Approx(-1.25).epsilon(0.01));
    // p = q, sigma = theta: bounded as t -> 0
    const LorentzQuadruple d{Index(2.0), Index(2.0), Index(2.0), Index(2.0)};
    double lo = HUGE_VAL, hi = 0.0;
    for (double t : {1e-8, 1e-6, 1e-4, 1e-2}) {
      const double v = corollary_rhs(h, d, t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(std::isfinite(hi));
    CHECK(hi / lo < 2.0);
  }

  TEST_CASE("pure Hardy corollary with p = q is constant") {
    const HarmonicProfile h = h0_of(make_pure_hardy(3.0, N3));
    const LorentzQuadruple d{Index(1.5), Index(1.5), Index(3.0), Index(3.0)};
    const double base = corollary_rhs(h, d, 1.0);
    for (double t : {1e-4, 1e-2, 1e2}) CHECK(corollary_rhs(h, d, t) == doctest::Approx(base).epsilon(1e-6));
  }

  TEST_CASE("divergent dual norms give an infinite right-hand side") {
    // A = -1/5 and p' = 21: r^{A p'} is not integrable at 0 in R^3
    const HarmonicProfile h = h0_of(make_pure_hardy(-0.16, N3));
    const LorentzQuadruple x{Index(1.05), kInf, Index(1.05), kInf};
    CHECK(std::isinf(theorem_rhs(h, x, 0, 0, 1.0)));
    CHECK(std::isinf(corollary_rhs(h, x, 1.0)));
  }

  TEST_CASE("ball norms grow with the radius") {
    const HarmonicProfile h = h0_of(make_two_scale(3.0, -3.0 / 16.0, N3));
    for (auto [p, s] : {std::pair{2.0, 2.0}, std::pair{1.5, HUGE_VAL}}) {
      double prev = 0.0;
      for (double R : {0.1, 1.0, 10.0, 100.0}) {
        const double n = lorentz_norm(profile_field(h, R), p, Index(s), Region::ball(R));
        CHECK(n > prev);
        prev = n;
      }
    }
  }

  TEST_CASE("gradient factor for power-law profiles") {
    // h0 = r^A with A = 1 and A = 2
    for (double lam : {2.0, 6.0}) {
      const HarmonicProfile h = h0_of(make_pure_hardy(lam, N3), 1e4);
      const double A = h.exponents.A1k;
      const LorentzQuadruple x{Index(1.0), kInf, Index(1.0), kInf};
      for (double t : {0.1, 1.0, 100.0}) {
        const double ratio = theorem_rhs(h, x, 1, 0, t) / theorem_rhs(h, x, 0, 0, t);
        CHECK(ratio == doctest::Approx((A + 1.0) / 2.0 / std::sqrt(t)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("free decay experiment") {
    ExperimentConfig c;
    c.t_min = 1.0;
    c.t_max = 1e4;
    c.per_decade = 4;
    const DecayReport rep = run_decay_experiment(c);
    REQUIRE(rep.rows.size() == 17);
    CHECK(rep.measured_fit.alpha == doctest::Approx(1.5).epsilon(0.02 / 1.5));
    CHECK(rep.pass_thm);
    CHECK(rep.pass_cor);
    for (const auto& row : rep.rows) {
      CHECK(row.ratio_thm == doctest::Approx(row.measured / row.thm_rhs));
      CHECK(row.ratio_cor <= 1.0);
    }
  }

  TEST_CASE("kernel report for the free Laplacian") {
    ExperimentConfig c;
    c.sources = {1.0};
    c.times = {0.3, 1.0, 3.0};
    const GaussianBoundReport rep = gaussian_bound_report(c);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].drift <= 0.05);
    CHECK(rep.rows[0].min_p >= -1e-12);
    CHECK(rep.pass);
    CHECK(rep.C >= rep.rows[0].C_refined);
  }
}

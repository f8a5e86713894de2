#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hardy/harmonic_profile.hpp"
#include "hardy/lorentz.hpp"
#include "oracles.hpp"
#include "random_fields.hpp"

using namespace hardy;

namespace {

const Dimension N3(3);
const Index kInf = Index::infinity();

// Lorentz norm of a sampled one-dimensional function by sorting: every
// sample carries measure h.
double sorted_norm_1d(std::vector<double> v, double h, double p, double sigma) {
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end(), std::greater<>());
  if (std::isinf(sigma)) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::pow((i + 1) * h, 1.0 / p) * v[i]);
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += std::pow(v[i], sigma) * (p / sigma) *
         (std::pow((i + 1) * h, sigma / p) - std::pow(i * h, sigma / p));
  return std::pow(s, 1.0 / sigma);
}

}  // namespace

TEST_SUITE("lorentz") {
  TEST_CASE("rearrangement of an indicator") {
    const Rearrangement r = decreasing_rearrangement(RadialField::indicator(1.0, N3));
    const double vol = 4.0 * oracle::pi / 3.0;
    CHECK(r(0.5 * vol) == doctest::Approx(1.0));
    CHECK(r(0.999 * vol) == doctest::Approx(1.0));
    CHECK(r(1.001 * vol) == 0.0);
    CHECK(r.measure() == doctest::Approx(vol));
  }

  TEST_CASE("rearrangement of |x|^-1 on the unit ball") {
    const Rearrangement r = decreasing_rearrangement(RadialField::power_law(-1.0, 1.0, N3));
    for (double s : {1e-6, 1e-3, 0.1, 1.0, 4.0})
      CHECK(r(s) == doctest::Approx(std::cbrt(4.0 * oracle::pi / (3.0 * s))).epsilon(1e-9));
  }

  TEST_CASE("radially decreasing fields are their own spherical rearrangement") {
    const RadialField f = RadialField::sample([](double r) { return std::exp(-r) / (1.0 + r * r); }, 1e-3, 20.0, 60, N3);
    const Rearrangement R = decreasing_rearrangement(f);
    for (double r : {0.01, 0.2, 1.0, 3.0, 10.0}) CHECK(R.spherical(r, N3) == doctest::Approx(f(r)).epsilon(1e-9));
  }

  TEST_CASE("power-law norms against closed forms") {
    for (int n : {2, 3, 5}) {
      const Dimension N(n);
      for (double A : {0.0, -0.3, -1.0})
        for (double p : {1.0, 1.5, 2.0, 4.0})
          for (double sigma : {1.0, 2.0, 3.5, HUGE_VAL}) {
            if (!(1.0 / p + A / n > 0.0) || !admissible(Index(p), Index(p), Index(sigma), Index(sigma))) continue;
            const double got = lorentz_norm(RadialField::power_law(A, 2.0, N), p, Index(sigma));
            CHECK(got == doctest::Approx(oracle::power_law_norm(A, 2.0, n, p, sigma)).epsilon(1e-9));
          }
    }
  }

  TEST_CASE("divergent power laws give infinity") {
    CHECK(std::isinf(lorentz_norm(RadialField::power_law(-2.0, 1.0, N3), 2.0, 2.0)));
    CHECK(std::isinf(lorentz_norm(RadialField::power_law(-1.5, 1.0, N3), 2.0, kInf)) == false);
    CHECK(std::isinf(lp_norm_direct(RadialField::power_law(-2.0, 1.0, N3), 2.0)));
  }

  TEST_CASE("L^{p,p} equals L^p on random fields") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const RadialField f = testing_fields::random_field(rng);
      for (double p : {1.5, 2.0, 3.0}) {
        const double direct = lp_norm_direct(f, p);
        CHECK(lorentz_norm(f, p, p) == doctest::Approx(direct).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("distribution is preserved by the rearrangement") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
      const Rearrangement R = decreasing_rearrangement(testing_fields::random_field(rng));
      const double top = std::isfinite(R.sup()) ? R.sup() : 10.0;
      for (double q : {0.01, 0.1, 0.3, 0.6, 0.9}) {
        const double lam = q * top;
        CHECK(R.rearranged_distribution(lam) == doctest::Approx(R.distribution(lam)).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("finite (p, s1) norm implies finite (p, s2) norm for s1 <= s2") {
    std::mt19937_64 rng(3);
    const std::vector<double> sig = {1.0, 1.5, 2.0, 4.0, HUGE_VAL};
    std::vector<RadialField> fields;
    for (int i = 0; i < 6; ++i) fields.push_back(testing_fields::random_field(rng));
    fields.push_back(RadialField::power_law(-1.0, 1.0, N3));  // borderline for p = 3
    for (const auto& f : fields)
      for (double p : {1.5, 3.0})
        for (std::size_t a = 0; a < sig.size(); ++a) {
          if (!std::isfinite(lorentz_norm(f, p, Index(sig[a])))) continue;
          for (std::size_t b = a; b < sig.size(); ++b) CHECK(std::isfinite(lorentz_norm(f, p, Index(sig[b]))));
        }
    CHECK(std::isinf(lorentz_norm(fields.back(), 3.0, 2.0)));
    CHECK(std::isfinite(lorentz_norm(fields.back(), 3.0, kInf)));
  }

  TEST_CASE("dilation covariance") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const RadialField f = testing_fields::random_field(rng);
      for (double s : {0.1, 3.0})
        for (auto [p, sigma] : {std::pair{2.0, 2.0}, std::pair{1.5, 4.0}, std::pair{3.0, HUGE_VAL}}) {
          const double base = lorentz_norm(f, p, Index(sigma));
          CHECK(lorentz_norm(f.dilated(s), p, Index(sigma)) ==
                doctest::Approx(std::pow(s, 3.0 / p) * base).epsilon(1e-8));
        }
    }
  }

  TEST_CASE("rearrangement inequality") {
    const StepField ind({0.0, 1.0}, {1.0}, N3);
    CHECK(product_integral(ind, ind) == doctest::Approx(rearranged_product_integral(ind, ind)));
    const StepField f({0.0, 0.5, 1.0, 2.0}, {3.0, 2.0, 0.5}, N3), g({0.0, 0.3, 1.5, 4.0}, {2.0, 1.0, 0.2}, N3);
    CHECK(product_integral(f, g) == doctest::Approx(rearranged_product_integral(f, g)).epsilon(1e-14));
    const RearrangementReport rep = check_rearrangement_inequalities(1000, N3, 2.0, 2.0, 42);
    CHECK(rep.trials == 1000);
    CHECK(rep.violations == 0);
    CHECK(rep.empirical_constant <= 1.0 + 1e-12);
  }

  TEST_CASE("modal fields: L^2 identity and the polar mode") {
    const RadialField a = RadialField::sample([](double r) { return std::exp(-r * r); }, 1e-4, 8.0, 200, N3);
    const RadialField b = RadialField::sample([](double r) { return r * std::exp(-r * r); }, 1e-4, 8.0, 200, N3, 1.0);
    const ModalField mixed(N3, {{0, 1, a.scaled(1.0 / harmonic_factor(0, N3))}, {1, 1, b.scaled(1.0 / harmonic_factor(1, N3))}});
    // ||a + b cos||_2^2 = 4 pi int (a^2 + b^2 / 3) r^2 dr
    const double la = lp_norm_direct(a, 2.0), lb = lp_norm_direct(b, 2.0);
    const double exact = std::sqrt(la * la + lb * lb / 3.0);
    CHECK(lorentz_norm(mixed, 2.0, 2.0) == doctest::Approx(exact).epsilon(1e-6));
    const ModalField polar(N3, {{1, 1, b.scaled(1.0 / harmonic_factor(1, N3))}});
    for (double p : {1.0, 2.0, 3.0}) {
      // the sphere average of |cos|^p is 1 / (p + 1)
      const double bp = lp_norm_direct(b, p);
      const double want = bp * std::pow(1.0 / (p + 1.0), 1.0 / p);
      CHECK(lorentz_norm(polar, p, p) == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK(lorentz_norm(mixed, 2.0, kInf) <= lorentz_norm(mixed, 2.0, 2.0) * 2.0);
  }

  TEST_CASE("ball-norm ratio of pure Hardy profiles is constant in t") {
    for (double lam : {-0.16, 0.0, 3.0}) {
      ProfileOptions o;
      o.r_max = 1e4;
      const HarmonicProfile h0 = solve_profile(make_pure_hardy(lam, N3), 0, o);
      for (auto [p, sigma] : {std::pair{1.0, 1.0}, std::pair{2.0, HUGE_VAL}, std::pair{1.5, 3.0}}) {
        std::vector<double> v;
        for (double t : {1e-2, 1e-1, 1.0, 10.0, 100.0})
          v.push_back(norm_ratio_h0(h0, p, Index(sigma), t) * std::pow(t, -1.5 / p));
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        CHECK(*hi / *lo - 1.0 <= 1e-6);
      }
    }
  }

  TEST_CASE("Young's inequality in one dimension") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double h = 0.02;
    const int n = 400;
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> f(n, 0.0), g(n, 0.0);
      for (int i = 0; i < n; ++i) {
        const double x = (i - n / 2) * h;
        f[i] = std::exp(-std::abs(x) * (0.5 + 3.0 * U(rng))) * (U(rng) < 0.9 ? 1.0 : 3.0);
        g[i] = std::abs(x) < 1.0 + U(rng) ? U(rng) : 0.0;
      }
      std::vector<double> c(2 * n - 1, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c[i + j] += f[i] * g[j] * h;
      // 1/q + 1 = 1/p + 1/r and 1/theta <= 1/sigma + 1/s
      const double lhs = sorted_norm_1d(c, h, 6.0, 4.0);
      const double rhs = sorted_norm_1d(f, h, 1.5, 2.0) * sorted_norm_1d(g, h, 2.0, 4.0);
      worst = std::max(worst, lhs / rhs);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 4.0);
  }
}

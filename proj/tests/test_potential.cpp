#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hardy/errors.hpp"
#include "hardy/potential.hpp"

using namespace hardy;

namespace {

PotentialSpec custom(double (*V)(double), double lambda1, double lambda2) {
  PotentialSpec s;
  s.N = Dimension(3);
  s.family = "custom";
  s.V = V;
  s.lambda1 = lambda1;
  s.lambda2 = lambda2;
  return s;
}

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("pure Hardy family") {
    const PotentialSpec free = make_pure_hardy(0.0, Dimension(3));
    CHECK(free.V(2.0) == 0.0);
    CHECK(free.criticality == Criticality::Subcritical);
    const PotentialSpec crit = make_pure_hardy(-1.0, Dimension(4));
    CHECK(crit.V(2.0) == doctest::Approx(-0.25));
    CHECK(crit.criticality == Criticality::Critical);
    const PotentialSpec three = make_pure_hardy(3.0, Dimension(3));
    CHECK(mode_exponents(0, three).A1k == doctest::Approx((-1.0 + std::sqrt(13.0)) / 2.0));
    CHECK_THROWS_AS(make_pure_hardy(-0.3, Dimension(3)), LambdaBelowCritical);
  }

  TEST_CASE("two-scale family") {
    const PotentialSpec same = make_two_scale(0.7, 0.7, Dimension(3));
    const PotentialSpec pure = make_pure_hardy(0.7, Dimension(3));
    for (double r : {1e-5, 0.3, 1.0, 7.0, 1e4}) CHECK(same.V(r) == doctest::Approx(pure.V(r)).epsilon(1e-14));
    const PotentialSpec ts = make_two_scale(3.0, -3.0 / 16.0, Dimension(3));
    CHECK(1e-12 * ts.V(1e-6) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(1e12 * ts.V(1e6) == doctest::Approx(-3.0 / 16.0).epsilon(1e-9));
    CHECK(ts.rho1 == 2.0);
    CHECK(ts.rho2 == 2.0);
  }

  TEST_CASE("two-scale r^2 V is monotone and bracketed") {
    for (auto [l1, l2] : {std::pair{3.0, -3.0 / 16.0}, std::pair{-0.2, 1.5}, std::pair{0.0, 4.0}}) {
      const PotentialSpec s = make_two_scale(l1, l2, Dimension(3));
      const auto grid = condition_V_grid(1e-6, 1e6, 20);
      const double sign = l2 > l1 ? 1.0 : -1.0;
      double prev = s.scaled_deviation(grid.front()) + l1;
      for (double r : grid) {
        const double q = r * r * s.V(r);
        CHECK(q >= std::min(l1, l2) - 1e-12);
        CHECK(q <= std::max(l1, l2) + 1e-12);
        CHECK(sign * (q - prev) >= -1e-12);
        prev = q;
      }
    }
  }

  TEST_CASE("mode potentials") {
    const PotentialSpec pure = make_pure_hardy(0.5, Dimension(3));
    CHECK(evaluate_mode_potential(pure, 2, 3.0) == doctest::Approx((0.5 + 6.0) / 9.0));
    const PotentialSpec ts = make_two_scale(3.0, -3.0 / 16.0, Dimension(3));
    for (double r : {0.01, 1.0, 50.0}) CHECK(evaluate_mode_potential(ts, 0, r) == ts.evaluate(r));
    CHECK(evaluate_mode_potential(make_pure_hardy(0.0, Dimension(3)), 1, 2.0) == doctest::Approx(0.5));
  }

  TEST_CASE("condition V on the built-in families") {
    const auto grid = condition_V_grid();
    for (double lam : {-0.16, 0.0, 3.0}) {
      const PotentialSpec s = make_pure_hardy(lam, Dimension(3));
      const ConditionVReport rep = validate_condition_V(s, grid);
      CHECK(rep.pass());
      CHECK(rep.sup_r3_dV == doctest::Approx(2.0 * std::abs(lam)).epsilon(1e-6).scale(1.0));
    }
    const ConditionVReport ts = validate_condition_V(make_two_scale(3.0, -3.0 / 16.0, Dimension(3)), grid);
    CHECK(ts.near_zero.fitted_rate == doctest::Approx(2.0).epsilon(0.02));
    CHECK(ts.near_infinity.fitted_rate == doctest::Approx(-2.0).epsilon(0.02));
  }

  TEST_CASE("condition V rejects the wrong homogeneity") {
    const PotentialSpec s = custom([](double r) { return 1.0 / (r * r * r); }, 0.0, 0.0);
    const ConditionVReport rep = inspect_condition_V(s, condition_V_grid());
    CHECK_FALSE(rep.near_zero.pass);
    CHECK_THROWS_AS(validate_condition_V(s, condition_V_grid()), ValidationFailure);
  }

  TEST_CASE("numerical derivative matches the analytic one") {
    PotentialSpec s = make_two_scale(3.0, -3.0 / 16.0, Dimension(3));
    for (double r : {1e-4, 0.5, 2.0, 1e3}) {
      const double analytic = s.derivative(r);
      PotentialSpec plain = s;
      plain.dV = nullptr;
      CHECK(plain.derivative(r) == doctest::Approx(analytic).epsilon(1e-6));
    }
  }

  TEST_CASE("nonnegativity scan") {
    CHECK(rayleigh_check(make_pure_hardy(0.0, Dimension(3)), 32).nonnegative);
    CHECK(rayleigh_check(make_pure_hardy(1.0, Dimension(3)), 32).min_normalized >= 1.0 - 1e-9);
    CHECK(rayleigh_scan(make_pure_hardy(-0.25, Dimension(3)), 32).nonnegative);
    const PotentialSpec below = custom([](double r) { return -0.35 / (r * r); }, -0.35, -0.35);
    CHECK_FALSE(rayleigh_scan(below, 32).nonnegative);
    CHECK_THROWS_AS(rayleigh_check(below, 32), NotNonnegative);
  }

  TEST_CASE("tabulated potential reproduces the two-scale family") {
    const PotentialSpec ts = make_two_scale(3.0, -3.0 / 16.0, Dimension(3));
    const auto grid = condition_V_grid(1e-7, 1e7, 200);
    std::vector<double> V;
    for (double r : grid) V.push_back(ts.V(r));
    const auto path = std::filesystem::temp_directory_path() / "hardy_table_test.csv";
    {
      std::ofstream f(path);
      f.precision(17);
      f << "r,V\n";
      for (std::size_t i = 0; i < grid.size(); ++i) f << grid[i] << ',' << V[i] << '\n';
    }
    const PotentialSpec tab = load_table_csv(path.string(), Dimension(3), Criticality::Subcritical);
    CHECK(tab.lambda1 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(tab.lambda2 == doctest::Approx(-3.0 / 16.0).epsilon(1e-9));
    for (double r : {1e-3, 0.37, 1.0, 11.0, 4e4}) CHECK(tab.V(r) == doctest::Approx(ts.V(r)).epsilon(1e-4));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(make_table({1.0}, {1.0}, Dimension(3), Criticality::Subcritical), std::invalid_argument);
  }

  TEST_CASE("condition N' on specs") {
    CHECK(check_Nprime(make_two_scale(3.0, -3.0 / 16.0, Dimension(3))));
    CHECK(check_Nprime(make_pure_hardy(-1.0, Dimension(4))));
  }
}

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hardy/decay_lab.hpp"
#include "hardy/errors.hpp"
#include "hardy/harmonic_profile.hpp"
#include "hardy/lorentz.hpp"
#include "hardy/radial_heat.hpp"
#include "oracles.hpp"
#include "random_fields.hpp"

using namespace hardy;

namespace {

const Dimension N3(3);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string config_path(const char* name) { return std::string(HARDY_SOURCE_DIR) + "/configs/" + name; }

Outcome euler_profiles() {
  double worst = 0.0, slowest = 0.0;
  for (int n : {3, 4})
    for (double lam : {-0.16, 0.0, 3.0})
      for (int k : {0, 1, 5, 20}) {
        const auto t0 = std::chrono::steady_clock::now();
        const HarmonicProfile P = solve_profile(make_pure_hardy(lam, Dimension(n)), k);
        slowest = std::max(slowest, seconds_since(t0));
        const double A = exponents(lam + omega(k, Dimension(n)), Dimension(n)).plus;
        for (double r : condition_V_grid(1e-3, 1e2, 100))
          worst = std::max(worst, std::abs(P.value(r) / std::pow(r, A) - 1.0));
      }
  return {worst <= 1e-6 && slowest <= 1.0,
          format("max rel error %.2e, slowest profile %.3f s", worst, slowest)};
}

Outcome gaussian_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> times = {0.1, 1.0, 10.0};
  double e0 = 0.0, e1 = 0.0;
  for (int k : {0, 1}) {
    auto P = std::make_shared<HarmonicProfile>(solve_profile(make_pure_hardy(0.0, N3), k));
    const RadialField phi =
        RadialField::sample([k](double r) { return std::pow(r, k) * std::exp(-r * r); }, 1e-5, 12.0, 400, N3, k);
    for (const auto& s : evolve_mode(P, phi, times).snapshots) {
      double err = 0.0, top = 0.0;
      for (std::size_t j = 0; j < s.r.size(); ++j) {
        const double exact = k == 0 ? oracle::gaussian_k0(s.r[j], s.t) : oracle::gaussian_k1(s.r[j], s.t);
        err = std::max(err, std::abs(s.v[j] - exact));
        top = std::max(top, std::abs(exact));
      }
      (k == 0 ? e0 : e1) = std::max(k == 0 ? e0 : e1, err / top);
    }
  }
  const double secs = seconds_since(t0);
  return {e0 <= 1e-3 && e1 <= 2e-3 && secs <= 30.0,
          format("k=0 error %.2e, k=1 error %.2e, %.2f s", e0, e1, secs)};
}

Outcome free_decay() {
  const DecayReport rep = run_decay_experiment(load_config(config_path("free.ini")));
  const double a = rep.measured_fit.alpha;
  return {std::abs(a - 1.5) <= 0.02, format("alpha %.4f (target 1.5)", a)};
}

Outcome two_scale_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const DecayReport rep = run_decay_experiment(load_config(config_path("two_scale.ini")));
  const double secs = seconds_since(t0);
  const double a = rep.measured_fit.alpha;
  const bool ok = std::abs(a - 1.25) <= 0.05 && std::isfinite(rep.max_ratio_cor) && rep.max_ratio_cor > 0.0 &&
                  std::abs(rep.trend_cor) <= 0.05 && secs <= 300.0;
  return {ok, format("alpha %.4f (beta %.3f), max ratio_cor %.4g, trend %.4f/decade, %.1f s", a,
                     rep.measured_fit.beta, rep.max_ratio_cor, rep.trend_cor, secs)};
}

Outcome gradient_decay() {
  const DecayReport rep = run_decay_experiment(load_config(config_path("gradient.ini")));
  double C = 0.0;
  bool finite = true;
  for (const auto& row : rep.rows)
    if (row.t >= 10.0 && row.t <= 1e4) {
      finite = finite && std::isfinite(row.ratio_thm);
      C = std::max(C, row.ratio_thm);
    }
  // h0 = r^A: the gradient factor over the value factor is (A + 1) / 2 t^{-1/2}
  double factor_err = 0.0;
  for (double lam : {2.0, 6.0}) {
    ProfileOptions o;
    o.r_max = 1e4;
    const HarmonicProfile h = solve_profile(make_pure_hardy(lam, N3), 0, o);
    const LorentzQuadruple x{Index(1.0), Index::infinity(), Index(1.0), Index::infinity()};
    for (double t : {0.1, 1.0, 100.0}) {
      const double want = (h.exponents.A1k + 1.0) / 2.0 / std::sqrt(t);
      factor_err = std::max(factor_err, std::abs(theorem_rhs(h, x, 1, 0, t) / theorem_rhs(h, x, 0, 0, t) / want - 1.0));
    }
  }
  return {finite && C > 0.0 && rep.pass_thm && factor_err <= 1e-6,
          format("C = %.4g on [10, 1e4], trend %.4f/decade to t=1e8, factor error %.1e", C, rep.trend_thm,
                 factor_err)};
}

Outcome lorentz_checks() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> P(1.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const RadialField f = testing_fields::random_field(rng);
    const double p = P(rng);
    worst = std::max(worst, std::abs(lorentz_norm(f, p, p) / lp_norm_direct(f, p) - 1.0));
  }
  const RearrangementReport rep = check_rearrangement_inequalities(1000, N3, 2.0, 2.0, 7);
  double spread = 0.0;
  for (double lam : {-0.16, 0.0, 3.0}) {
    ProfileOptions o;
    o.r_max = 1e4;
    const HarmonicProfile h = solve_profile(make_pure_hardy(lam, N3), 0, o);
    std::vector<double> v;
    for (double t = 1e-2; t <= 1e2 * 1.0001; t *= std::sqrt(10.0))
      v.push_back(norm_ratio_h0(h, 2.0, 2.0, t) * std::pow(t, -0.75));
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    spread = std::max(spread, *hi / *lo - 1.0);
  }
  return {worst <= 1e-6 && rep.violations == 0 && spread <= 0.01,
          format("L^{p,p}/L^p error %.1e, %d/%d violations, ball-ratio spread %.1e", worst, rep.violations,
                 rep.trials, spread)};
}

Outcome reflecting_conservation() {
  double drift = 0.0;
  bool monotone = true;
  auto run = [&](const PotentialSpec& s, int k) {
    SolverOptions o;
    o.boundary = Boundary::Reflecting;
    auto P = std::make_shared<HarmonicProfile>(solve_profile(s, k));
    SolverState st(P, 100.0, o);
    st.set_data(RadialField::sample([k](double r) { return std::pow(r, k) * std::exp(-r * r); }, 1e-5, 12.0, 200,
                                    N3, k));
    st.advance_to(100.0);
    const auto& h = st.history();
    drift = std::max(drift, std::abs(h.back().mass - h.front().mass) / std::abs(h.front().mass) / 100.0);
    for (std::size_t i = 1; i < h.size(); ++i) monotone = monotone && h[i].l2 <= h[i - 1].l2 * (1.0 + 1e-12);
  };
  for (double lam : {-0.16, 0.0, 3.0})
    for (int k : {0, 1}) run(make_pure_hardy(lam, N3), k);
  run(make_two_scale(3.0, -3.0 / 16.0, N3), 0);
  return {drift <= 1e-10 && monotone,
          format("mass drift %.1e per unit time, weighted L2 %s", drift, monotone ? "non-increasing" : "increased")};
}

Outcome structure_constants() {
  const PotentialSpec s = make_two_scale(3.0, -3.0 / 16.0, N3);
  double mass_C = 0.0, worst_picard = 0.0;
  std::vector<double> fitted;
  for (double start : {0.25, 0.5, 1.0}) {
    ProfileOptions o;
    o.picard_start = start;
    double C = 0.0;
    for (int k = 0; k <= 50; ++k) {
      const HarmonicProfile P = solve_profile(s, k, o);
      if (start == 1.0) {
        const auto m = mass_ratio_nodes(P);
        mass_C = std::max(mass_C, *std::max_element(m.begin(), m.end()));
      }
      worst_picard = std::max(worst_picard, P.picard_ratio);
      C = std::max(C, P.picard_ratio * (k + 1) / std::pow(P.picard_radius, P.rho1));
    }
    fitted.push_back(C);
  }
  const auto [lo, hi] = std::minmax_element(fitted.begin(), fitted.end());
  return {std::isfinite(mass_C) && worst_picard <= 0.5 && *hi / *lo <= 2.0,
          format("mass ratio C = %.4f, max Picard factor %.3g, fitted C in [%.3f, %.3f] across R0", mass_C,
                 worst_picard, *lo, *hi)};
}

Outcome kernel_envelope() {
  ExperimentConfig free;
  free.sources = {0.5, 1.0, 2.0};
  free.times = {0.1, 0.3, 1.0, 3.0, 10.0};
  const GaussianBoundReport a = gaussian_bound_report(free);
  const GaussianBoundReport b = gaussian_bound_report(load_config(config_path("kernel_hardy.ini")));
  double drift = 0.0, min_p = 0.0;
  for (const auto* r : {&a, &b})
    for (const auto& row : r->rows) {
      drift = std::max(drift, row.drift);
      min_p = std::min(min_p, row.min_p);
    }
  return {a.pass && b.pass && drift <= 0.05 && min_p >= -1e-12,
          format("C free %.3f, C hardy %.3f, refinement drift %.1e, min p %.1e", a.C, b.C, drift, min_p)};
}

Outcome cone_representation() {
  auto P = std::make_shared<HarmonicProfile>(solve_profile(make_pure_hardy(0.0, N3), 0));
  SolverState g(P, 100.0);
  g.set_data(RadialField::sample([](double r) { return std::exp(-r * r); }, 1e-5, 12.0, 400, N3));
  double worst = 0.0;
  for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
    g.advance_to(t);
    worst = std::max(worst, cone_diagnostics(g, 0.5).max_residual);
  }
  return {worst <= 1e-4, format("max relative residual %.1e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"pure-Hardy profiles against exact powers", euler_profiles},
      {"free Gaussian evolution against closed forms", gaussian_oracle},
      {"free decay exponent", free_decay},
      {"two-scale decay exponent and corollary ratio", two_scale_decay},
      {"gradient bound with a single constant", gradient_decay},
      {"Lorentz norms, rearrangement, ball ratios", lorentz_checks},
      {"reflecting mass conservation and L2 decay", reflecting_conservation},
      {"structure constants over k <= 50", structure_constants},
      {"kernel Gaussian envelope", kernel_envelope},
      {"representation inside the parabolic cone", cone_representation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

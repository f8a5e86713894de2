#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hardy/mode_spectrum.hpp"

namespace hardy {

/// A radial inverse-square potential V with its asymptotic data.
///
/// V(r) = lambda1 r^-2 + O(r^{-2+rho1}) near 0 and lambda2 r^-2 + O(r^{-2-rho2})
/// at infinity. The criticality tag is configuration: built-in families set
/// it from known theory, user potentials must declare it.
struct PotentialSpec {
  Dimension N{3};
  std::string family;
  std::function<double(double)> V;
  std::function<double(double)> dV;  // empty: central differences are used
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rho1 = 2.0;
  double rho2 = 2.0;
  Criticality criticality = Criticality::Subcritical;
  double C_V = 0.0;        // |V - lambda1 r^-2| <= C_V r^{-2+rho1}
  double C_V_prime = 0.0;  // |V - lambda2 r^-2| <= C_V' r^{-2-rho2}

  double evaluate(double r) const { return V(r); }
  double derivative(double r) const;

  /// r^2 V(r) - lambda1; the only potential data the profile ODE sees after
  /// removing the indicial singularity.
  double scaled_deviation(double r) const { return r * r * V(r) - lambda1; }
};

PotentialSpec make_pure_hardy(double lambda, Dimension N);

/// V(r) = (lambda1 + lambda2 r^2) / (r^2 (1 + r^2)), rho1 = rho2 = 2.
/// Default criticality: critical only when both coefficients equal the Hardy constant.
PotentialSpec make_two_scale(double lambda1, double lambda2, Dimension N,
                             std::optional<Criticality> criticality = std::nullopt);

/// Tabulated potential: r^2 V(r) interpolated linearly in log r, held constant
/// outside the table. lambda1/lambda2 default to the end values of r^2 V.
PotentialSpec make_table(std::vector<double> r, std::vector<double> V, Dimension N,
                         Criticality criticality, std::optional<double> lambda1 = std::nullopt,
                         std::optional<double> lambda2 = std::nullopt, double rho1 = 1.0,
                         double rho2 = 1.0);

/// Reads a two-column CSV (r, V(r)); a non-numeric first line is treated as a header.
PotentialSpec load_table_csv(const std::string& path, Dimension N, Criticality criticality,
                             std::optional<double> lambda1 = std::nullopt,
                             std::optional<double> lambda2 = std::nullopt, double rho1 = 1.0,
                             double rho2 = 1.0);

/// V(r) + omega_k r^-2.
double evaluate_mode_potential(const PotentialSpec& spec, int k, double r);

ModeExponents mode_exponents(int k, const PotentialSpec& spec);

/// Condition (N') for the spec.
bool check_Nprime(const PotentialSpec& spec);

/// Log-uniform radii from lo to hi with the given density.
std::vector<double> condition_V_grid(double lo = 1e-6, double hi = 1e6, int per_decade = 200);

struct ClauseResult {
  std::string clause;
  bool pass = false;
  double fitted_constant = 0.0;  // least-squares envelope constant at the declared rate
  double fitted_rate = 0.0;      // free log-log slope of the deviation
  double max_ratio = 0.0;        // max of deviation / declared envelope shape
  double violating_radius = 0.0;
  std::string detail;
};

struct ConditionVReport {
  ClauseResult near_zero;    // (ii) as r -> 0
  ClauseResult near_infinity;// (ii) as r -> inf
  ClauseResult derivative;   // (iii) sup |r^3 V'|
  double sup_r3_dV = 0.0;
  bool pass() const { return near_zero.pass && near_infinity.pass && derivative.pass; }
};

/// Sampled check of condition (V); never throws on failure.
ConditionVReport inspect_condition_V(const PotentialSpec& spec, const std::vector<double>& grid);

/// As inspect_condition_V, but throws ValidationFailure on the first failing clause.
ConditionVReport validate_condition_V(const PotentialSpec& spec, const std::vector<double>& grid);

struct RayleighTrial {
  double inner_scale = 0.0;
  double shape_power = 0.0;  // phi ~ r^{-shape_power} eta(log r)
  double form = 0.0;         // int |grad phi|^2 + V phi^2
  double gradient_energy = 0.0;
};

struct RayleighReport {
  std::vector<RayleighTrial> trials;
  double min_normalized = 0.0;  // min of form / gradient_energy
  bool nonnegative = true;
};

/// Evaluates the quadratic form of H on compactly supported radial bumps.
RayleighReport rayleigh_scan(const PotentialSpec& spec, int trials);

/// As rayleigh_scan, but throws NotNonnegative when some trial is negative.
RayleighReport rayleigh_check(const PotentialSpec& spec, int trials);

}  // namespace hardy

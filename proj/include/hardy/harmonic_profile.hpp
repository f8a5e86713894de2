#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hardy/log_grid.hpp"
#include "hardy/potential.hpp"

namespace hardy {

/// Closed-form solutions v^{+/-}_{k,lambda} of the Euler equation with
/// coefficient lambda + omega_k. The minus branch at the Hardy constant for
/// k = 0 carries the |log(r/2)| factor.
class ComparisonProfile {
 public:
  enum class Branch { Plus, Minus };

  ComparisonProfile(Branch branch, int k, double lambda, Dimension N);

  double operator()(double r) const;
  double derivative(double r) const;
  double exponent() const { return exponent_; }
  bool log_corrected() const { return log_corrected_; }
  Branch branch() const { return branch_; }

 private:
  Branch branch_;
  double exponent_;
  bool log_corrected_;
};

struct ProfileOptions {
  double r_min = 1e-6;
  double r_max = 1e3;
  int per_decade = 64;
  double tol = 1e-12;         // Picard stopping ratio and ODE local error
  double picard_start = 1.0;  // first trial for the Picard radius R0
  int picard_refine = 8;      // Picard sub-grid is per_decade * picard_refine
  int max_picard_iterations = 200;
};

/// Sampled h_k on a log grid together with its construction metadata.
///
/// The profile is stored through the de-singularized unknown
/// g = h / r^{A_{1,k}} and its log-derivative gx = r g'(r); h and dh are
/// derived from them.
struct HarmonicProfile {
  int k = 0;
  Dimension N{3};
  ModeExponents exponents;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rho1 = 2.0;
  Criticality criticality = Criticality::Subcritical;

  LogGrid grid;
  std::vector<double> g, gx;
  std::vector<double> h, dh;

  double picard_radius = 0.0;
  double picard_ratio = 0.0;           // largest ratio of successive sup differences
  double picard_first_difference = 0.0;// sup |z_2 - z_1| / v^+ on (0, R0]
  int picard_iterations = 0;
  double matching_mismatch = 0.0;      // Picard vs continuation across one decade below R0
  int ode_steps = 0;

  double r_min() const { return grid.r.front(); }
  double r_max() const { return grid.r.back(); }

  /// h_k(r); below the grid the power law r^{A_{1,k}} g(r_min) is used.
  double value(double r) const;
  double derivative(double r) const;
  /// g(r) = h_k(r) / r^{A_{1,k}}.
  double normalized(double r) const;
  /// v_k(r) = r^{A_{2,k}} (log r)^{B_k}.
  double far_shape(double r) const;
};

HarmonicProfile solve_profile(const PotentialSpec& spec, int k, const ProfileOptions& options = {});

struct CkFit {
  double c_k = 0.0;
  double residual = 0.0;  // max |h/v_k - c_k| over the top decade
};

/// Matched large-r constant; throws AsymptoticNotReached when residual > 0.05 c_k.
CkFit fit_ck(const HarmonicProfile& profile);

/// f_k(r) = int_0^r s^{1-N} nu_k^{-1} int_0^s tau^{N-1} nu_k dtau ds with nu_k = h_k^2.
double weight_fk(const HarmonicProfile& profile, double r);

/// f_k on every grid node.
std::vector<double> weight_fk_nodes(const HarmonicProfile& profile);

/// (k+1) int_0^r s^{N-1} h_k^2 ds / (r^N h_k(r)^2) on every grid node.
std::vector<double> mass_ratio_nodes(const HarmonicProfile& profile);

struct AsymptoticCaps {
  double ratio_cap = 10.0;       // C in C^{-1} <= h/v <= C
  double derivative_cap = 2.0;   // C in the derivative sandwich
  double near_rate_cap = 1e4;    // cap on sup |h - v^+| / (r^rho1 v^+)
};

struct AsymptoticReport {
  double near_min = 0.0, near_max = 0.0;  // h / v^+_{k,lambda1} on (0, 1]
  double far_min = 0.0, far_max = 0.0;    // h / v_k on the far range
  double far_from = 1.0;                  // start of the far range
  double near_rate_constant = 0.0;        // sup |h - v^+| / (r^rho1 v^+) on (0, 1]
  double near_rate_derivative = 0.0;      // sup |h' - v^+'| / (r^{rho1-1} v^+)
  bool has_sandwich = false;              // k >= 1
  double sandwich_min = 0.0, sandwich_max = 0.0;  // r h' / (k h)
  bool pass = true;
  std::vector<std::string> failures;
};

AsymptoticReport compare_asymptotics(const HarmonicProfile& profile,
                                     const AsymptoticCaps& caps = {});

/// Smallest k* <= k_max such that the derivative sandwich holds with C = 2 for
/// every k in [k*, k_max]; returns -1 when even k_max fails.
int find_kstar(const PotentialSpec& spec, int k_max, const ProfileOptions& options = {});

/// Largest |h'' + (N-1) h'/r - V_k h| / (1e-6 |V_k h| + 1e-10) over interior
/// nodes, with h'' taken from a 7-point difference of the stored derivative.
/// Values <= 1 mean the sampled profile satisfies the ODE to that tolerance.
double ode_residual(const HarmonicProfile& profile, const PotentialSpec& spec);

using RadialFunction = std::function<double(double)>;

struct PicardOperatorResult {
  std::vector<double> radii;
  std::vector<double> values;
  double envelope = 0.0;           // observed sup |f| / (r^{-2+eps} v^+)
  double observed_constant = 0.0;  // sup |F[f]| (k+1) / (M r^eps v^+)
};

/// The Volterra operator F^+_{k,lambda}[f] evaluated at `radii` by nested
/// adaptive quadrature. The caller asserts |f| <= M r^{-2+eps} v^+; the
/// bound is checked on the sample radii (EnvelopeViolation otherwise).
PicardOperatorResult picard_operator(int k, double lambda, Dimension N, const RadialFunction& f,
                                     double epsilon, double M, std::span<const double> radii);

}  // namespace hardy

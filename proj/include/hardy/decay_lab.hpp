#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hardy/harmonic_profile.hpp"
#include "hardy/index.hpp"
#include "hardy/lorentz.hpp"
#include "hardy/potential.hpp"
#include "hardy/radial_heat.hpp"

namespace hardy {

/// t^{-N/2-j} (||h0||_{p',s'} / h0(sqrt t)) (||grad^l h0||_{q,theta} / h0(sqrt t) + t^{N/2q - l/2}),
/// norms over B(0, sqrt t); +inf when a norm diverges.
double theorem_rhs(const HarmonicProfile& h0, const LorentzQuadruple& x, int ell, int j, double t);

/// t^{-N/2} ||h0||_{p',s'} ||h0||_{q,theta} / h0(sqrt t)^2 over B(0, sqrt t).
double corollary_rhs(const HarmonicProfile& h0, const LorentzQuadruple& x, double t);

/// ||grad^l u||_{L^{q,theta}} of an assembled solution.
double measure_norm(const ModalEvaluator& u, Index q, Index theta, int ell);

struct PowerFit {
  double alpha = 0.0;        // value ~ t^{-alpha} (log t)^beta
  double alpha_error = 0.0;  // standard error
  double beta = 0.0;         // 0 unless significant
  double beta_error = 0.0;
  bool beta_significant = false;
  int points = 0;
};

/// Least squares of log(value) on -log t and log log t over [t_lo, t_hi];
/// beta is kept when |beta| > 3 standard errors.
PowerFit fit_decay(std::span<const double> t, std::span<const double> value, double t_lo, double t_hi);

/// Slope of log10(value) against log10(t) over [t_lo, t_hi].
double trend_slope(std::span<const double> t, std::span<const double> value, double t_lo, double t_hi);

enum class DataFamily { Indicator, Gaussian, ProfileShaped };

const char* to_string(DataFamily f);

struct PotentialConfig {
  std::string family = "pure_hardy";
  int N = 3;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<Criticality> criticality;
  std::string table;
  double rho1 = 1.0, rho2 = 1.0;
};

struct ExperimentConfig {
  PotentialConfig potential;
  // initial data: radial shape times r^k for each listed mode
  DataFamily data = DataFamily::Indicator;
  double data_radius = 1.0;
  std::vector<int> modes = {0};
  std::vector<double> amplitudes = {1.0};
  std::vector<double> sources = {1.0};  // kernel source radii
  LorentzQuadruple quadruple{Index(1.0), Index::infinity(), Index(1.0), Index::infinity()};
  int ell = 0;
  int j = 0;
  double t_min = 1.0;
  double t_max = 1e4;
  int per_decade = 8;
  std::vector<double> times;  // explicit list overrides the geometric range
  double fit_min = 1e2;
  double fit_max = 1e4;
  SolverOptions solver;
  ProfileOptions profile;
  int threads = 1;
  std::string out_dir = "out";
  std::string prefix = "run";

  std::vector<double> sample_times() const;
};

PotentialSpec make_potential(const PotentialConfig& c);

/// Reads the INI schema (sections potential, modes, lorentz, times, solver, outputs).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Every resolved parameter as key = value lines.
std::map<std::string, std::string> describe(const ExperimentConfig& c);

struct DecayRow {
  double t = 0.0;
  double measured = 0.0;
  double thm_rhs = 0.0;
  double cor_rhs = 0.0;
  double ratio_thm = 0.0;  // NaN where the RHS is infinite
  double ratio_cor = 0.0;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  PowerFit measured_fit, thm_fit, cor_fit;
  std::optional<PowerFit> measured_small_t;  // t < 1 when sampled
  double max_ratio_thm = 0.0, max_ratio_cor = 0.0;
  double trend_thm = 0.0, trend_cor = 0.0;  // per decade over the final two decades
  bool pass_thm = false, pass_cor = false;
  double input_norm = 0.0;  // ||phi||_{p,sigma} before normalization
  double escaped_fraction = 0.0;
  std::vector<std::string> notes;
};

/// Builds the profiles, evolves the configured data and compares the
/// measured norms with both right-hand sides.
DecayReport run_decay_experiment(const ExperimentConfig& c);

struct GaussianBoundRow {
  double y = 0.0;
  double C = 0.0;
  double C_refined = 0.0;
  double drift = 0.0;  // |C_refined / C - 1|
  double min_p = 0.0;
};

struct GaussianBoundReport {
  std::vector<GaussianBoundRow> rows;
  double C = 0.0;  // single constant over every source after refinement
  bool pass = false;
  std::vector<KernelEstimate> estimates;  // refined runs
};

/// Kernel envelope constants for every configured source at grid scale s and 2s.
GaussianBoundReport gaussian_bound_report(const ExperimentConfig& c);

/// Profile of mode k reaching the radius the heat grid of c needs.
std::shared_ptr<const HarmonicProfile> heat_profile(const PotentialSpec& spec, int k,
                                                    const ExperimentConfig& c);

/// Initial radial coefficient of mode k for the configured family.
RadialField initial_mode(const ExperimentConfig& c, const HarmonicProfile& h0, int k, double amplitude);

}  // namespace hardy

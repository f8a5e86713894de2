#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hardy/index.hpp"
#include "hardy/mode_spectrum.hpp"

namespace hardy {

struct HarmonicProfile;

/// Radial set on which a norm is taken; the field is zero-extended outside.
struct Region {
  enum class Kind { Whole, Ball, Exterior, Annulus };
  Kind kind = Kind::Whole;
  double inner = 0.0;
  double outer = std::numeric_limits<double>::infinity();

  static Region whole() { return {}; }
  static Region ball(double R) { return {Kind::Ball, 0.0, R}; }
  static Region exterior(double R) { return {Kind::Exterior, R, std::numeric_limits<double>::infinity()}; }
  static Region annulus(double a, double b) { return {Kind::Annulus, a, b}; }
};

/// Sampled radial function f(|x|) on R^N.
///
/// Between nodes f is interpolated as a power law when neighbouring samples
/// share a sign and are nonzero, linearly otherwise. Below the first node
/// f = f(r_0) (r / r_0)^inner_exponent; beyond the last node f is zero unless
/// an outer exponent is given.
class RadialField {
 public:
  RadialField(std::vector<double> radii, std::vector<double> values, Dimension N,
              double inner_exponent = 0.0, std::optional<double> outer_exponent = std::nullopt);

  static RadialField sample(const std::function<double(double)>& f, double r_lo, double r_hi,
                            int per_decade, Dimension N, double inner_exponent = 0.0,
                            std::optional<double> outer_exponent = std::nullopt);
  /// |x|^A restricted to B(0, R).
  static RadialField power_law(double A, double R, Dimension N);
  /// Indicator of B(0, R).
  static RadialField indicator(double R, Dimension N);

  double operator()(double r) const;

  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& values() const { return v_; }
  Dimension dimension() const { return N_; }
  double inner_exponent() const { return inner_; }
  const std::optional<double>& outer_exponent() const { return outer_; }

  /// x -> f(x / s).
  RadialField dilated(double s) const;
  RadialField scaled(double c) const;

 private:
  std::vector<double> r_, v_;
  Dimension N_;
  double inner_;
  std::optional<double> outer_;
};

/// Level structure of |f|: mu(lambda) = |{|f| > lambda}| with its kinks and tails.
struct LevelData {
  std::function<double(double)> mu;
  std::vector<double> levels;  // sorted positive breakpoints of mu
  double sup = 0.0;            // ess sup |f|, possibly +inf
  double measure = 0.0;        // |{f != 0}|, possibly +inf
  // mu(lambda) = exp(log_top_coeff) lambda^top_exponent above levels.back() when sup = +inf
  double log_top_coeff = 0.0, top_exponent = 0.0;
  // mu(lambda) ~ lambda^bottom_exponent as lambda -> 0 when measure = +inf
  double bottom_exponent = 0.0;
  // mu is affine between consecutive levels
  bool affine_between_levels = false;
};

/// Non-increasing rearrangement f* of a level structure.
class Rearrangement {
 public:
  explicit Rearrangement(LevelData data);

  /// f*(s) = inf { lambda : mu(lambda) <= s }.
  double operator()(double s) const;
  /// f^#(x) = f*(|B(0,1)| |x|^N).
  double spherical(double r, Dimension N) const;
  double distribution(double lambda) const { return data_.mu(lambda); }
  /// |{f* > lambda}|, measured on f* itself by bisection in s.
  double rearranged_distribution(double lambda) const;
  double sup() const { return data_.sup; }
  double measure() const { return data_.measure; }
  /// (s, f*(s)) on a log grid of s spanning the support.
  std::vector<std::pair<double, double>> samples(int per_decade) const;

  const LevelData& data() const { return data_; }

 private:
  LevelData data_;
};

LevelData level_data(const RadialField& f, const Region& region = Region::whole());

Rearrangement decreasing_rearrangement(const RadialField& f, const Region& region = Region::whole());

/// ||f||_{L^{p,sigma}} from a level structure; +inf when a tail diverges.
double lorentz_norm(const LevelData& data, Index p, Index sigma);
double lorentz_norm(const RadialField& f, Index p, Index sigma, const Region& region = Region::whole());

/// (int |f|^p dx)^{1/p} by adaptive quadrature in r, for cross-checks.
double lp_norm_direct(const RadialField& f, double p, const Region& region = Region::whole());

/// One term v_{k,i}(r) Q_{k,i}(x/|x|) of a modal sum.
struct ModalComponent {
  int k = 0;
  int i = 1;
  RadialField field;
};

/// Finite modal sum with angular factors from the implemented set: k = 0 in
/// any dimension and k = 1, i = 1 (Q proportional to cos(theta)) for N = 3.
class ModalField {
 public:
  ModalField(Dimension N, std::vector<ModalComponent> components);

  /// u at radius r and polar cosine mu = cos(theta).
  double operator()(double r, double cos_theta) const;
  /// Radial coefficients a(r), b(r) with u = a(r) + b(r) cos(theta).
  double radial_part(double r) const;
  double polar_part(double r) const;

  Dimension dimension() const { return N_; }
  const std::vector<ModalComponent>& components() const { return components_; }
  bool has_polar() const { return polar_ >= 0; }
  bool has_radial() const { return radial_ >= 0; }
  const RadialField& radial_field() const { return components_.at(radial_).field; }
  const RadialField& polar_field() const { return components_.at(polar_).field; }

 private:
  Dimension N_;
  std::vector<ModalComponent> components_;
  int radial_ = -1;
  int polar_ = -1;
};

LevelData level_data(const ModalField& f);
Rearrangement decreasing_rearrangement(const ModalField& f);
double lorentz_norm(const ModalField& f, Index p, Index sigma);

/// Angular factor of the implemented harmonics.
double harmonic_factor(int k, Dimension N);

/// Piecewise-constant radial function: value c_j on the shell r_j <= |x| < r_{j+1}.
class StepField {
 public:
  StepField(std::vector<double> edges, std::vector<double> values, Dimension N);

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& values() const { return values_; }
  Dimension dimension() const { return N_; }

  /// f* as (cumulative volume, value) steps in decreasing order of |value|.
  std::vector<std::pair<double, double>> rearranged() const;
  double lorentz_norm(Index p, Index sigma) const;

 private:
  std::vector<double> edges_, values_;
  Dimension N_;
};

/// int |f g| dx, exact.
double product_integral(const StepField& f, const StepField& g);
/// int_0^inf f*(s) g*(s) ds, exact.
double rearranged_product_integral(const StepField& f, const StepField& g);

struct RearrangementReport {
  int trials = 0;
  int violations = 0;
  double worst_excess = 0.0;        // max of (int |fg| - int f* g*) / int f* g*
  double empirical_constant = 0.0;  // max of int |fg| / (||f||_{p,s} ||g||_{p',s'})
};

/// Random shell pairs: checks int |fg| <= int f* g* and measures the Hoelder constant.
RearrangementReport check_rearrangement_inequalities(int trials, Dimension N, Index p, Index sigma,
                                                     std::uint64_t seed = 1);

/// h_k (or |h_k'|) restricted to B(0, R) as a RadialField on the profile nodes.
RadialField profile_field(const HarmonicProfile& profile, double R, bool derivative = false);

/// ||h_0||_{L^{p,sigma}(B(0, sqrt t))} / h_0(sqrt t).
double norm_ratio_h0(const HarmonicProfile& profile, Index p, Index sigma, double t);

}  // namespace hardy

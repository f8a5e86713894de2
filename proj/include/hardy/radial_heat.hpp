#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hardy/harmonic_profile.hpp"
#include "hardy/lorentz.hpp"

namespace hardy {

enum class Boundary { Reflecting, Absorbing };

const char* to_string(Boundary b);

struct SolverOptions {
  double tol = 1e-6;            // local error target per step, relative to max |w|
  double grid_scale = 1.0;      // multiplies the node density
  int per_decade = 200;         // far-field nodes per decade of r
  double core = 0.05;           // below this radius the grid is nearly uniform
  double r_max = 0.0;           // 0: 40 sqrt(t_final)
  Boundary boundary = Boundary::Absorbing;
  double dt_initial = 0.0;      // 0: chosen from the finest cell
  double dt_max = std::numeric_limits<double>::infinity();
  double escape_limit = 1e-3;   // fraction of the initial mass
  int max_steps = 2000000;
};

/// Finite-volume discretization of the radial problem for w = v / h_k.
///
/// Nodes sit at the centres of a sinh-graded partition of [0, R_max]; the
/// first face is r = 0. Masses are int nu r^{N-1} over each control volume and
/// conductances are the exact two-point values 1 / int dr / (nu r^{N-1}),
/// with nu = h_k^2.
struct HeatGrid {
  std::vector<double> r;            // nodes
  std::vector<double> faces;        // size n + 1, faces[0] = 0, faces[n] = R_max
  std::vector<double> mass;         // size n
  std::vector<double> conductance;  // size n - 1, between nodes j and j + 1
  double outer_conductance = 0.0;   // last node to the absorbing wall
  std::vector<double> h, dh;        // h_k and h_k' at the nodes

  std::size_t size() const { return r.size(); }
  double r_max() const { return faces.back(); }
};

HeatGrid build_heat_grid(const HarmonicProfile& profile, double r_max, const SolverOptions& options);

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double error = 0.0;    // step-doubling estimate relative to max |w|
  double mass = 0.0;     // sum w_j m_j
  double escaped = 0.0;  // mass absorbed at R_max so far
  double l2 = 0.0;       // (sum w_j^2 m_j)^{1/2}
};

/// Single-owner state of one mode: Crank-Nicolson with step doubling, four
/// implicit Euler quarter steps at start-up and after every data change.
class SolverState {
 public:
  SolverState(std::shared_ptr<const HarmonicProfile> profile, double t_final,
              const SolverOptions& options = {});

  const HarmonicProfile& profile() const { return *profile_; }
  const HeatGrid& grid() const { return grid_; }
  const SolverOptions& options() const { return options_; }
  std::span<const double> w() const { return w_; }
  double time() const { return t_; }

  /// w = phi / h_k at the nodes, time reset to 0.
  void set_data(const RadialField& phi);
  void set_w(std::vector<double> w);

  void advance_to(double t);

  double mass() const;
  double weighted_l2() const;
  double escaped_mass() const { return escaped_; }
  double initial_mass() const { return initial_mass_; }
  bool escape_flagged() const { return escape_flagged_; }
  const std::vector<StepRecord>& history() const { return history_; }

  /// Discrete L_k u = nu^{-1} div(nu grad u) with this state's boundary.
  std::vector<double> apply_operator(std::span<const double> u) const;

  std::vector<double> v() const;
  /// dv/dr = h' w + h w' with a three-point nonuniform difference for w'.
  std::vector<double> dv_dr() const;
  /// h_k times an arbitrary node vector.
  std::vector<double> times_profile(std::span<const double> u) const;
  std::vector<double> derivative_of(std::span<const double> u) const;

 private:
  void step(std::vector<double>& w, double dt, double theta, double& outflow) const;
  void record(double dt, double error);
  void filter(std::vector<double>& e, double a) const;

  std::shared_ptr<const HarmonicProfile> profile_;
  SolverOptions options_;
  HeatGrid grid_;
  std::vector<double> w_;
  double t_ = 0.0;
  double dt_ = 0.0;
  int startup_ = 0;
  double escaped_ = 0.0;
  double initial_mass_ = 0.0;
  bool escape_flagged_ = false;
  std::vector<StepRecord> history_;
};

/// v = h_k w on the heat grid at one output time.
struct ModeSnapshot {
  double t = 0.0;
  int k = 0;
  Dimension N{3};
  double inner_exponent = 0.0;
  std::vector<double> r, w, v, dv_dr;

  RadialField field() const;
  /// |dv/dr| as a radial field.
  RadialField derivative_field() const;
};

struct ModeEvolution {
  std::vector<ModeSnapshot> snapshots;
  std::vector<StepRecord> history;
  double initial_mass = 0.0;
  double escaped_mass = 0.0;
  bool escape_flagged = false;
};

/// [e^{-t H_k} phi](r) at each requested time.
ModeEvolution evolve_mode(std::shared_ptr<const HarmonicProfile> profile, const RadialField& phi,
                          std::span<const double> times, const SolverOptions& options = {});

struct TimeDerivative {
  RadialField field;
  bool accuracy_warning = false;  // j >= 3 amplifies grid noise
};

/// h_k L_k^j w, the discrete d^j/dt^j of the mode.
TimeDerivative time_derivative(const SolverState& state, int j);

/// One evolved mode with its angular label.
struct ModalSnapshot {
  int k = 0;
  int i = 1;
  ModeSnapshot snapshot;
};

/// u and |grad u| of a finite modal sum at a fixed time.
class ModalEvaluator {
 public:
  ModalEvaluator(Dimension N, std::vector<ModalSnapshot> modes);

  double u(double r, double cos_theta) const;
  double grad_norm(double r, double cos_theta) const;
  /// u as a modal field for Lorentz norms.
  ModalField field() const;
  /// sup |u| and sup |grad u| over nodes and polar angles.
  double sup_u() const;
  double sup_grad() const;
  /// |grad u| as a radial field when every mode is k = 0.
  RadialField radial_gradient() const;
  bool radial() const;

  Dimension dimension() const { return N_; }

 private:
  struct Parts {
    double a, da, b, db;
  };
  Parts parts(double r) const;
  std::vector<double> nodes() const;

  Dimension N_;
  std::vector<ModalSnapshot> modes_;
};

ModalEvaluator assemble(Dimension N, std::vector<ModalSnapshot> modes);

struct KernelSample {
  double t = 0.0;
  double x = 0.0;
  double p = 0.0;
  double bound = 0.0;  // envelope with the fitted C
  double ratio = 0.0;  // p / bound
};

struct KernelEstimate {
  double y = 0.0;
  std::vector<double> times;
  std::vector<KernelSample> samples;
  double C = 0.0;
  double min_p = 0.0;        // smallest sampled p relative to the largest
  double mass_defect = 0.0;  // largest |1 - int p dx| over the times
};

struct KernelOptions {
  SolverOptions solver;
  int bump_cells = 4;
  double floor = 1e-10;  // samples with p below floor * max p are not fitted
  std::vector<double> offsets = {0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
};

/// Radial kernel average p(x, y, t) for mode 0 from a narrow unit-mass bump
/// at |y| = y, with the smallest C such that
/// p <= C t^{-N/2} h~(x) h~(y) / h_0(sqrt t)^2 exp(-(|x| - y)^2 / (C t)).
KernelEstimate estimate_kernel(std::shared_ptr<const HarmonicProfile> profile0, double y,
                               std::span<const double> times, const KernelOptions& options = {});

/// Smallest C with p <= C base exp(-d2 / (C t)).
double envelope_constant(double p, double base, double d2, double t);

struct ConeRow {
  double r = 0.0;
  double w = 0.0;
  double F = 0.0;
  double residual = 0.0;  // |w - w(0) - F| / |w(0)|
};

struct ConeReport {
  double t = 0.0;
  double delta = 0.0;
  int j = 0;
  double w0 = 0.0;
  std::vector<ConeRow> rows;
  double max_residual = 0.0;
  double fitted_constant = 0.0;  // sup |F| t^{N/2 + j + 1} / r^2 in the cone
};

/// Checks w^{(j)}(r) - w^{(j)}(0) = F^j(r) inside r < delta sqrt(t), with F^j
/// the nested weighted integral of L_k^{j+1} w taken by quadrature on the
/// profile weight.
ConeReport cone_diagnostics(const SolverState& state, double delta, int j = 0);

}  // namespace hardy

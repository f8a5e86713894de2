#include "hardy/radial_heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "hardy/errors.hpp"
#include "hardy/log_grid.hpp"

namespace hardy {

namespace {

using detail::kGaussNodes;
using detail::kGaussWeights;

// int_a^b g^2 r^{beta-1} dr through u = r^beta, exact for g constant.
double weight_integral(const HarmonicProfile& P, double a, double b, double beta) {
  double s = 0.0;
  if (a == 0.0) {
    for (int q = 0; q < kCellGaussPoints; ++q) {
      const double g = P.normalized(b * std::pow(kGaussNodes[q], 1.0 / beta));
      s += kGaussWeights[q] * g * g;
    }
    return std::pow(b, beta) / beta * s;
  }
  const double span = std::pow(b / a, beta) - 1.0;
  for (int q = 0; q < kCellGaussPoints; ++q) {
    const double g = P.normalized(a * std::pow(1.0 + kGaussNodes[q] * span, 1.0 / beta));
    s += kGaussWeights[q] * g * g;
  }
  return std::pow(a, beta) * span / beta * s;
}

// int_a^b dr / (g^2 r^{beta-1}), a > 0, exact for g constant.
double resistance(const HarmonicProfile& P, double a, double b, double beta) {
  const double e = 2.0 - beta;
  double s = 0.0;
  if (std::abs(e) < 1e-12) {
    const double L = std::log(b / a);
    for (int q = 0; q < kCellGaussPoints; ++q) {
      const double g = P.normalized(a * std::exp(kGaussNodes[q] * L));
      s += kGaussWeights[q] / (g * g);
    }
    return std::pow(a, e) * L * s;
  }
  const double span = std::pow(b / a, e) - 1.0;
  for (int q = 0; q < kCellGaussPoints; ++q) {
    const double g = P.normalized(a * std::pow(1.0 + kGaussNodes[q] * span, 1.0 / e));
    s += kGaussWeights[q] / (g * g);
  }
  return std::pow(a, e) * span / e * s;
}

// Thomas algorithm for lower l, diagonal d, upper u (l[0], u[n-1] unused).
void solve_tridiagonal(std::span<const double> l, std::vector<double> d, std::span<const double> u,
                       std::vector<double>& x) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(std::abs(d[i - 1]) > 0.0)) throw StabilityFailure("zero pivot in tridiagonal solve");
    const double m = l[i] / d[i - 1];
    d[i] -= m * u[i - 1];
    x[i] -= m * x[i - 1];
  }
  if (!(std::abs(d[n - 1]) > 0.0)) throw StabilityFailure("zero pivot in tridiagonal solve");
  x[n - 1] /= d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - u[i] * x[i + 1]) / d[i];
}

double max_abs(std::span<const double> u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

double linear_at(std::span<const double> r, std::span<const double> u, double x) {
  if (x <= r.front()) return u.front();
  if (x >= r.back()) return u.back();
  const auto i = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), x) - r.begin()) - 1;
  const double s = (x - r[i]) / (r[i + 1] - r[i]);
  return u[i] + s * (u[i + 1] - u[i]);
}

double derivative_inner_exponent(double A) { return A == 0.0 ? 1.0 : A - 1.0; }

}  // namespace

const char* to_string(Boundary b) {
  return b == Boundary::Reflecting ? "reflecting" : "absorbing";
}

HeatGrid build_heat_grid(const HarmonicProfile& P, double r_max, const SolverOptions& opt) {
  if (!(r_max > 0.0)) throw std::invalid_argument("heat grid needs R_max > 0");
  if (r_max > P.r_max() * (1.0 + 1e-12))
    throw std::invalid_argument("profile does not reach the heat grid radius");
  if (!(opt.grid_scale > 0.0) || opt.per_decade < 1 || !(opt.core > 0.0))
    throw std::invalid_argument("invalid heat grid parameters");
  const double xi_max = std::asinh(r_max / opt.core);
  const double target = std::log(10.0) / (opt.per_decade * opt.grid_scale);
  const auto n = static_cast<std::size_t>(std::ceil(xi_max / target));
  const double dxi = xi_max / static_cast<double>(n);
  const double beta = P.N.as_double() + 2.0 * P.exponents.A1k;

  HeatGrid G;
  G.faces.resize(n + 1);
  G.r.resize(n);
  for (std::size_t j = 0; j <= n; ++j) G.faces[j] = opt.core * std::sinh(dxi * static_cast<double>(j));
  G.faces[n] = r_max;
  for (std::size_t j = 0; j < n; ++j) G.r[j] = opt.core * std::sinh(dxi * (static_cast<double>(j) + 0.5));

  G.mass.resize(n);
  G.h.resize(n);
  G.dh.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    G.mass[j] = weight_integral(P, G.faces[j], G.faces[j + 1], beta);
    G.h[j] = P.value(G.r[j]);
    G.dh[j] = P.derivative(G.r[j]);
  }
  G.conductance.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) G.conductance[j] = 1.0 / resistance(P, G.r[j], G.r[j + 1], beta);
  G.outer_conductance = 1.0 / resistance(P, G.r[n - 1], r_max, beta);
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(G.mass[j]) || !(G.mass[j] > 0.0) || !std::isfinite(G.h[j]))
      throw StabilityFailure("weight h_k^2 is not representable on the heat grid");
  return G;
}

SolverState::SolverState(std::shared_ptr<const HarmonicProfile> profile, double t_final,
                         const SolverOptions& options)
    : profile_(std::move(profile)), options_(options) {
  if (!profile_) throw std::invalid_argument("SolverState needs a profile");
  if (!(options_.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  double R = options_.r_max;
  if (!(R > 0.0)) R = 40.0 * std::sqrt(std::max(t_final, 1.0));
  grid_ = build_heat_grid(*profile_, R, options_);
  w_.assign(grid_.size(), 0.0);
}

// w_j = int_cell phi h r^{N-1} / m_j: the weighted projection keeps the mass exact.
void SolverState::set_data(const RadialField& phi) {
  const HarmonicProfile& P = *profile_;
  const double beta = P.N.as_double() + P.exponents.A1k;
  const double edge = phi.radii().back();
  // int_a^b phi g r^{beta-1} dr through u = r^beta
  auto piece = [&](double a, double b) {
    double s = 0.0;
    const double lo = std::pow(a, beta), hi = std::pow(b, beta);
    for (int q = 0; q < kCellGaussPoints; ++q) {
      const double r = std::pow(lo + kGaussNodes[q] * (hi - lo), 1.0 / beta);
      s += kGaussWeights[q] * phi(r) * P.normalized(r);
    }
    return (hi - lo) / beta * s;
  };
  std::vector<double> w(grid_.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double a = grid_.faces[j], b = grid_.faces[j + 1];
    double total = 0.0;
    if (a < edge && edge < b) {
      total = piece(a, edge) + (phi.outer_exponent() ? piece(edge, b) : 0.0);
    } else {
      const double m = a + 0.5 * (b - a);
      total = piece(a, m) + piece(m, b);
    }
    w[j] = total / grid_.mass[j];
  }
  set_w(std::move(w));
}

void SolverState::set_w(std::vector<double> w) {
  if (w.size() != grid_.size()) throw std::invalid_argument("data size does not match the grid");
  w_ = std::move(w);
  t_ = 0.0;
  escaped_ = 0.0;
  escape_flagged_ = false;
  startup_ = 4;
  const double dr = grid_.faces[1];
  dt_ = options_.dt_initial > 0.0 ? options_.dt_initial : 0.1 * dr * dr;
  initial_mass_ = mass();
  history_.clear();
  record(0.0, 0.0);
}

double SolverState::mass() const {
  double m = 0.0;
  for (std::size_t j = 0; j < w_.size(); ++j) m += w_[j] * grid_.mass[j];
  return m;
}

double SolverState::weighted_l2() const {
  double m = 0.0;
  for (std::size_t j = 0; j < w_.size(); ++j) m += w_[j] * w_[j] * grid_.mass[j];
  return std::sqrt(m);
}

std::vector<double> SolverState::apply_operator(std::span<const double> u) const {
  const std::size_t n = grid_.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double f = grid_.conductance[j] * (u[j + 1] - u[j]);
    out[j] += f;
    out[j + 1] -= f;
  }
  if (options_.boundary == Boundary::Absorbing) out[n - 1] -= grid_.outer_conductance * u[n - 1];
  for (std::size_t j = 0; j < n; ++j) out[j] /= grid_.mass[j];
  return out;
}

// (M + theta dt K) w+ = (M - (1 - theta) dt K) w.
void SolverState::step(std::vector<double>& w, double dt, double theta, double& outflow) const {
  const std::size_t n = w.size();
  const auto& c = grid_.conductance;
  const bool absorbing = options_.boundary == Boundary::Absorbing;
  std::vector<double> Kw(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double f = c[j] * (w[j + 1] - w[j]);
    Kw[j] -= f;
    Kw[j + 1] += f;
  }
  if (absorbing) Kw[n - 1] += grid_.outer_conductance * w[n - 1];
  std::vector<double> rhs(n), l(n, 0.0), d(n), u(n, 0.0);
  const double a = theta * dt, b = (1.0 - theta) * dt;
  for (std::size_t j = 0; j < n; ++j) {
    rhs[j] = grid_.mass[j] * w[j] - b * Kw[j];
    d[j] = grid_.mass[j];
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    d[j] += a * c[j];
    d[j + 1] += a * c[j];
    u[j] = -a * c[j];
    l[j + 1] = -a * c[j];
  }
  if (absorbing) d[n - 1] += a * grid_.outer_conductance;
  const double old_edge = w[n - 1];
  solve_tridiagonal(l, std::move(d), u, rhs);
  outflow = absorbing ? dt * grid_.outer_conductance * (theta * rhs[n - 1] + (1.0 - theta) * old_edge) : 0.0;
  w = std::move(rhs);
}

// e <- (M + a K)^{-1} M e
void SolverState::filter(std::vector<double>& e, double a) const {
  const std::size_t n = e.size();
  const auto& c = grid_.conductance;
  std::vector<double> l(n, 0.0), d(grid_.mass), u(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) e[j] *= grid_.mass[j];
  for (std::size_t j = 0; j + 1 < n; ++j) {
    d[j] += a * c[j];
    d[j + 1] += a * c[j];
    u[j] = -a * c[j];
    l[j + 1] = -a * c[j];
  }
  if (options_.boundary == Boundary::Absorbing) d[n - 1] += a * grid_.outer_conductance;
  solve_tridiagonal(l, std::move(d), u, e);
}

void SolverState::record(double dt, double error) {
  history_.push_back({t_, dt, error, mass(), escaped_, weighted_l2()});
}

void SolverState::advance_to(double t_end) {
  if (t_end < t_) throw std::invalid_argument("cannot integrate backwards in time");
  int steps = 0;
  while (t_ < t_end) {
    if (++steps > options_.max_steps) throw StabilityFailure("step budget exhausted");
    double dt = std::min({dt_, options_.dt_max, t_end - t_});
    const bool landing = dt == t_end - t_;
    if (startup_ > 0) {
      // implicit Euler start damps the stiff modes Crank-Nicolson would keep
      double out = 0.0;
      step(w_, dt, 1.0, out);
      escaped_ += out;
      t_ = landing ? t_end : t_ + dt;
      --startup_;
      record(dt, 0.0);
      continue;
    }
    std::vector<double> big = w_, half = w_;
    double out_big = 0.0, out1 = 0.0, out2 = 0.0;
    step(big, dt, 0.5, out_big);
    step(half, 0.5 * dt, 0.5, out1);
    step(half, 0.5 * dt, 0.5, out2);
    // the filter keeps the undamped stiff slaved components out of the estimate
    std::vector<double> e(half.size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = half[j] - big[j];
    filter(e, 0.5 * dt);
    const double diff = max_abs(e);
    const double scale = std::max(max_abs(half), 1e-300);
    const double err = diff / (3.0 * scale);
    const double grow = err > 0.0 ? 0.9 * std::cbrt(options_.tol / err) : 2.0;
    if (err > options_.tol) {
      dt_ = dt * std::max(0.2, grow);
      continue;
    }
    w_ = std::move(half);
    escaped_ += out1 + out2;
    t_ = landing ? t_end : t_ + dt;
    if (!landing || grow < 1.0) dt_ = dt * std::clamp(grow, 0.2, 2.0);
    record(dt, err);
    if (options_.boundary == Boundary::Absorbing && !escape_flagged_ &&
        escaped_ > options_.escape_limit * std::abs(initial_mass_))
      escape_flagged_ = true;
  }
}

std::vector<double> SolverState::times_profile(std::span<const double> u) const {
  std::vector<double> v(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) v[j] = grid_.h[j] * u[j];
  return v;
}

std::vector<double> SolverState::derivative_of(std::span<const double> w) const {
  const auto& r = grid_.r;
  const std::size_t n = r.size();
  std::vector<double> d(n);
  // w is even in r: w ~ w0 + gamma r^2 near the first node
  d[0] = 2.0 * r[0] * (w[1] - w[0]) / (r[1] * r[1] - r[0] * r[0]);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hm = r[j] - r[j - 1], hp = r[j + 1] - r[j];
    d[j] = (-hp / (hm * (hm + hp))) * w[j - 1] + ((hp - hm) / (hm * hp)) * w[j] +
           (hm / (hp * (hm + hp))) * w[j + 1];
  }
  d[n - 1] = (w[n - 1] - w[n - 2]) / (r[n - 1] - r[n - 2]);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = grid_.dh[j] * w[j] + grid_.h[j] * d[j];
  return out;
}

std::vector<double> SolverState::v() const { return times_profile(w_); }

std::vector<double> SolverState::dv_dr() const { return derivative_of(w_); }

RadialField ModeSnapshot::field() const { return RadialField(r, v, N, inner_exponent); }

RadialField ModeSnapshot::derivative_field() const {
  return RadialField(r, dv_dr, N, derivative_inner_exponent(inner_exponent));
}

namespace {

ModeSnapshot snapshot_of(const SolverState& s) {
  ModeSnapshot m;
  m.t = s.time();
  m.k = s.profile().k;
  m.N = s.profile().N;
  m.inner_exponent = s.profile().exponents.A1k;
  m.r = s.grid().r;
  m.w.assign(s.w().begin(), s.w().end());
  m.v = s.v();
  m.dv_dr = s.dv_dr();
  return m;
}

}  // namespace

ModeEvolution evolve_mode(std::shared_ptr<const HarmonicProfile> profile, const RadialField& phi,
                          std::span<const double> times, const SolverOptions& options) {
  if (times.empty()) return {};
  if (!std::is_sorted(times.begin(), times.end()) || times.front() < 0.0)
    throw std::invalid_argument("output times must be nonnegative and increasing");
  SolverState state(std::move(profile), times.back(), options);
  state.set_data(phi);
  ModeEvolution out;
  for (double t : times) {
    state.advance_to(t);
    out.snapshots.push_back(snapshot_of(state));
  }
  out.history = state.history();
  out.initial_mass = state.initial_mass();
  out.escaped_mass = state.escaped_mass();
  out.escape_flagged = state.escape_flagged();
  return out;
}

TimeDerivative time_derivative(const SolverState& state, int j) {
  if (j < 0) throw std::invalid_argument("derivative order must be >= 0");
  std::vector<double> u(state.w().begin(), state.w().end());
  for (int i = 0; i < j; ++i) u = state.apply_operator(u);
  const auto& P = state.profile();
  return {RadialField(state.grid().r, state.times_profile(u), P.N, P.exponents.A1k), j >= 3};
}

ModalEvaluator::ModalEvaluator(Dimension N, std::vector<ModalSnapshot> modes)
    : N_(N), modes_(std::move(modes)) {
  bool radial = false, polar = false;
  for (const auto& m : modes_) {
    if (m.k == 0 && m.i == 1 && !radial) {
      radial = true;
    } else if (m.k == 1 && m.i == 1 && N.value() == 3 && !polar) {
      polar = true;
    } else {
      std::ostringstream msg;
      msg << "mode (k=" << m.k << ", i=" << m.i << ") in N=" << N.value() << " is outside the assembled set";
      throw UnsupportedMode(msg.str());
    }
  }
}

ModalEvaluator::Parts ModalEvaluator::parts(double r) const {
  Parts p{0.0, 0.0, 0.0, 0.0};
  for (const auto& m : modes_) {
    const double q = harmonic_factor(m.k, N_);
    const auto& s = m.snapshot;
    double v, dv;
    if (r < s.r.front()) {
      const double ratio = r / s.r.front();
      v = s.v.front() * std::pow(ratio, s.inner_exponent);
      dv = s.dv_dr.front() * std::pow(ratio, derivative_inner_exponent(s.inner_exponent));
    } else {
      v = linear_at(s.r, s.v, r);
      dv = linear_at(s.r, s.dv_dr, r);
      if (r > s.r.back()) v = dv = 0.0;
    }
    if (m.k == 0) {
      p.a = q * v;
      p.da = q * dv;
    } else {
      p.b = q * v;
      p.db = q * dv;
    }
  }
  return p;
}

double ModalEvaluator::u(double r, double mu) const {
  const Parts p = parts(r);
  return p.a + p.b * mu;
}

double ModalEvaluator::grad_norm(double r, double mu) const {
  const Parts p = parts(r);
  const double radial = p.da + p.db * mu;
  const double angular = r > 0.0 ? p.b / r : p.db;
  return std::sqrt(radial * radial + angular * angular * (1.0 - mu * mu));
}

std::vector<double> ModalEvaluator::nodes() const {
  std::vector<double> r;
  for (const auto& m : modes_) r.insert(r.end(), m.snapshot.r.begin(), m.snapshot.r.end());
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

double ModalEvaluator::sup_u() const {
  double s = 0.0;
  for (double r : nodes()) {
    const Parts p = parts(r);
    s = std::max(s, std::abs(p.a) + std::abs(p.b));
  }
  return s;
}

double ModalEvaluator::sup_grad() const {
  double s = 0.0;
  for (double r : nodes()) {
    const Parts p = parts(r);
    const double c = p.b / r;
    // |grad u|^2 = alpha mu^2 + 2 beta mu + gamma on [-1, 1]
    const double alpha = p.db * p.db - c * c, beta = p.da * p.db, gamma = p.da * p.da + c * c;
    auto f = [&](double mu) { return alpha * mu * mu + 2.0 * beta * mu + gamma; };
    double best = std::max(f(-1.0), f(1.0));
    if (alpha < 0.0) {
      const double mu = -beta / alpha;
      if (std::abs(mu) <= 1.0) best = std::max(best, f(mu));
    }
    s = std::max(s, std::sqrt(std::max(best, 0.0)));
  }
  return s;
}

bool ModalEvaluator::radial() const {
  return std::all_of(modes_.begin(), modes_.end(), [](const auto& m) { return m.k == 0; });
}

RadialField ModalEvaluator::radial_gradient() const {
  if (!radial() || modes_.empty()) throw UnsupportedMode("gradient field needs a single radial mode");
  const auto& s = modes_.front().snapshot;
  return s.derivative_field().scaled(harmonic_factor(0, N_));
}

ModalField ModalEvaluator::field() const {
  std::vector<ModalComponent> c;
  for (const auto& m : modes_) c.push_back({m.k, m.i, m.snapshot.field()});
  return ModalField(N_, std::move(c));
}

ModalEvaluator assemble(Dimension N, std::vector<ModalSnapshot> modes) {
  return ModalEvaluator(N, std::move(modes));
}

double envelope_constant(double p, double base, double d2, double t) {
  if (!(p > 0.0)) return 0.0;
  const double lo = p / base;
  if (d2 == 0.0) return lo;
  const double target = std::log(lo);
  auto g = [&](double C) { return std::log(C) - d2 / (C * t) - target; };
  double a = lo, b = lo;
  while (g(b) < 0.0) b *= 2.0;
  boost::uintmax_t iters = 200;
  const auto [x0, x1] = boost::math::tools::toms748_solve(
      g, a, b, boost::math::tools::eps_tolerance<double>(50), iters);
  return x1;
}

KernelEstimate estimate_kernel(std::shared_ptr<const HarmonicProfile> profile0, double y,
                               std::span<const double> times, const KernelOptions& opt) {
  if (!profile0 || profile0->k != 0) throw std::invalid_argument("kernel estimates use the k = 0 profile");
  if (times.empty()) throw std::invalid_argument("kernel estimate needs output times");
  const HarmonicProfile& P = *profile0;
  const Dimension N = P.N;
  const double n = N.as_double();
  SolverState state(profile0, times.back(), opt.solver);
  const HeatGrid& G = state.grid();
  if (!(y > G.r.front()) || !(y < 0.5 * G.r_max())) throw std::invalid_argument("source radius outside the grid");

  // cos^2 bump over bump_cells cells, unit mass of u = h w in R^N
  const auto jy = static_cast<std::size_t>(std::lower_bound(G.r.begin(), G.r.end(), y) - G.r.begin());
  const double half = 0.5 * opt.bump_cells * (G.faces[jy + 1] - G.faces[jy]);
  std::vector<double> w(G.size(), 0.0);
  double mass = 0.0;
  const double area = unit_sphere_area(N);
  for (std::size_t j = 0; j < G.size(); ++j) {
    const double s = (G.r[j] - y) / half;
    if (std::abs(s) >= 1.0) continue;
    const double c = std::cos(0.5 * std::numbers::pi * s);
    w[j] = c * c;
    const double vol = (std::pow(G.faces[j + 1], n) - std::pow(G.faces[j], n)) / n;
    mass += area * G.h[j] * w[j] * vol;
  }
  for (double& x : w) x /= mass;
  state.set_w(std::move(w));

  KernelEstimate est;
  est.y = y;
  est.times.assign(times.begin(), times.end());
  double worst = 0.0;
  for (double t : times) {
    state.advance_to(t);
    const std::vector<double> p = state.v();
    const double pmax = max_abs(p);
    double total = 0.0;
    for (std::size_t j = 0; j < G.size(); ++j) {
      worst = std::min(worst, p[j] / pmax);
      total += area * p[j] * (std::pow(G.faces[j + 1], n) - std::pow(G.faces[j], n)) / n;
    }
    est.mass_defect = std::max(est.mass_defect, std::abs(1.0 - total));
    const double st = std::sqrt(t);
    const double hs = P.value(st);
    const double base0 = std::pow(t, -0.5 * n) * P.value(std::min(y, st)) / (hs * hs);
    for (double off : opt.offsets) {
      for (double sign : {-1.0, 1.0}) {
        if (off == 0.0 && sign < 0.0) continue;
        const double x = y + sign * off * st;
        if (!(x > G.r.front()) || !(x < 0.5 * G.r_max())) continue;
        KernelSample s;
        s.t = t;
        s.x = x;
        s.p = linear_at(G.r, p, x);
        s.bound = base0 * P.value(std::min(x, st));
        if (s.p >= opt.floor * pmax) {
          const double c = envelope_constant(s.p, s.bound, (x - y) * (x - y), t);
          est.C = std::max(est.C, c);
        }
        est.samples.push_back(s);
      }
    }
  }
  est.min_p = worst;
  if (worst < -1e-12) {
    std::ostringstream msg;
    msg << "sampled kernel reached " << worst << " of its maximum";
    throw PositivityViolation(msg.str());
  }
  for (auto& s : est.samples) {
    const double base = s.bound;
    s.bound = est.C * base * std::exp(-(s.x - y) * (s.x - y) / (est.C * s.t));
    s.ratio = s.bound > 0.0 ? s.p / s.bound : 0.0;
  }
  return est;
}

ConeReport cone_diagnostics(const SolverState& state, double delta, int j) {
  if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("cone aperture must lie in (0, 1]");
  if (j < 0) throw std::invalid_argument("derivative order must be >= 0");
  const HarmonicProfile& P = state.profile();
  const HeatGrid& G = state.grid();
  const double n = P.N.as_double();
  const double beta = n + 2.0 * P.exponents.A1k;
  const double t = state.time();
  const double edge = delta * std::sqrt(t);

  std::vector<double> wj(state.w().begin(), state.w().end());
  for (int i = 0; i < j; ++i) wj = state.apply_operator(wj);
  const std::vector<double> q = state.apply_operator(wj);
  const auto& r = G.r;
  auto qa = [&](double s) { return linear_at(r, q, s); };
  auto nu_r = [&](double s) {
    const double g = P.normalized(s);
    return g * g * std::pow(s, beta - 1.0);
  };

  // I(s) = int_0^s tau^{N-1} nu q, with q = q_0 on [0, r_0]
  auto inner_head = [&](double s) { return q[0] * weight_integral(P, 0.0, s, beta); };
  std::vector<double> I(r.size());
  I[0] = inner_head(r[0]);
  for (std::size_t i = 0; i + 1 < r.size() && r[i] < edge; ++i)
    I[i + 1] = I[i] + gauss5([&](double s) { return nu_r(s) * qa(s); }, r[i], r[i + 1]);
  auto I_at = [&](std::size_t i, double s) {
    if (i == 0 && s <= r[0]) return inner_head(s);
    return I[i] + gauss5([&](double u) { return nu_r(u) * qa(u); }, r[i], s);
  };
  auto outer = [&](std::size_t i, double a, double b) {
    return gauss5([&](double s) { return I_at(i, s) / nu_r(s); }, a, b);
  };

  ConeReport rep;
  rep.t = t;
  rep.delta = delta;
  rep.j = j;
  std::vector<double> F(r.size(), 0.0);
  F[0] = outer(0, 0.0, r[0]);
  rep.w0 = wj[0] - F[0];
  for (std::size_t i = 0; i < r.size() && r[i] < edge; ++i) {
    if (i > 0) F[i] = F[i - 1] + outer(i - 1, r[i - 1], r[i]);
    ConeRow row{r[i], wj[i], F[i], std::abs(wj[i] - rep.w0 - F[i]) / std::abs(rep.w0)};
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.fitted_constant =
        std::max(rep.fitted_constant, std::abs(F[i]) * std::pow(t, 0.5 * n + j + 1.0) / (r[i] * r[i]));
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hardy

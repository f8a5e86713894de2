#include "hardy/harmonic_profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hardy/errors.hpp"

namespace hardy {

namespace {

constexpr double kLn10 = 2.302585092994046;

// Radau IIA, three stages, order 5.
struct RadauTableau {
  std::array<double, 3> c;
  std::array<std::array<double, 3>, 3> a;
  RadauTableau() {
    const double s6 = std::sqrt(6.0);
    c = {(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0};
    a[0] = {(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0};
    a[1] = {(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0};
    a[2] = {(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0};
  }
};

const RadauTableau& radau() {
  static const RadauTableau t;
  return t;
}

using State = std::array<double, 2>;  // (g, g_x)

// g_xx + b g_x = W(x) g, written as y' = M(x) y.
class ContinuationOde {
 public:
  ContinuationOde(const PotentialSpec& spec, double b, double tol)
      : spec_(spec), b_(b), tol_(tol) {}

  State step(double x, double h, const State& y) const {
    const auto& t = radau();
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::Matrix<double, 6, 1> rhs;
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i) w[i] = W(x + t.c[i] * h);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double s = h * t.a[i][j];
        A(2 * i, 2 * j + 1) -= s;
        A(2 * i + 1, 2 * j) -= s * w[i];
        A(2 * i + 1, 2 * j + 1) += s * b_;
      }
      rhs(2 * i) = y[1];
      rhs(2 * i + 1) = w[i] * y[0] - b_ * y[1];
    }
    const Eigen::Matrix<double, 6, 1> K = A.partialPivLu().solve(rhs);
    State out = y;
    for (int j = 0; j < 3; ++j) {
      out[0] += h * t.a[2][j] * K(2 * j);
      out[1] += h * t.a[2][j] * K(2 * j + 1);
    }
    return out;
  }

  // Integrates from x0 to x1 and records the state at each x in `stops`
  // (increasing, inside (x0, x1]).
  std::vector<State> integrate(double x0, State y, std::span<const double> stops, double h0,
                               int& steps) const {
    std::vector<State> out;
    out.reserve(stops.size());
    double x = x0;
    double h = h0;
    for (double target : stops) {
      while (x < target) {
        const bool last = x + h >= target;
        const double hs = last ? target - x : h;
        const State full = step(x, hs, y);
        const State half = step(x + 0.5 * hs, 0.5 * hs, step(x, 0.5 * hs, y));
        const double sg = std::abs(half[0]) + std::numeric_limits<double>::min();
        const double sd = std::abs(half[1]) + std::abs(half[0]);
        const double err = std::max(std::abs(half[0] - full[0]) / sg,
                                    std::abs(half[1] - full[1]) / sd) / 31.0;
        if (!std::isfinite(err)) throw OdeFailure("non-finite state near x=" + std::to_string(x));
        if (err <= tol_) {
          x = last ? target : x + hs;
          y = {half[0] + (half[0] - full[0]) / 31.0, half[1] + (half[1] - full[1]) / 31.0};
          ++steps;
        }
        const double grow = err > 0.0 ? 0.9 * std::pow(tol_ / err, 1.0 / 6.0) : 5.0;
        const double next = hs * std::clamp(grow, 0.2, 5.0);
        if (!last || err > tol_) h = next;
        if (h < 1e-12) throw OdeFailure("step size underflow near r=" + std::to_string(std::exp(x)));
      }
      out.push_back(y);
    }
    return out;
  }

 private:
  double W(double x) const { return spec_.scaled_deviation(std::exp(x)); }

  const PotentialSpec& spec_;
  double b_;
  double tol_;
};

struct PicardRun {
  LogGrid grid;
  std::vector<double> g, gx;
  std::vector<double> differences;
  bool converged = false;
  double ratio = 0.0;
};

// Fixed point g = 1 + G[g] of the de-singularized Volterra operator on the
// fine grid ending at x_top. S = int exp(-b(x-y)) W g dy is g_x and
// G[g] = int S.
PicardRun picard_iterate(const PotentialSpec& spec, double b, const LogGrid& fine,
                         const ProfileOptions& opt) {
  PicardRun run;
  run.grid = fine;
  const std::size_t n = fine.size();
  const auto xq = cell_gauss_points(fine);
  std::vector<double> Wq(xq.size());
  for (std::size_t i = 0; i < xq.size(); ++i) Wq[i] = spec.scaled_deviation(std::exp(xq[i]));
  const double W0 = spec.scaled_deviation(fine.r.front());
  const double rho = spec.rho1;

  run.g.assign(n, 1.0);
  run.gx.assign(n, 0.0);
  for (int it = 0; it < opt.max_picard_iterations; ++it) {
    const auto S = exp_kernel_cumulative(fine, run.g, b, Wq, W0 * run.g.front() / (b + rho));
    const auto G = exp_kernel_cumulative(fine, S, 0.0, {}, S.front() / rho);
    double d = 0.0, gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = 1.0 + G[i];
      d = std::max(d, std::abs(next - run.g[i]));
      run.g[i] = next;
      gmax = std::max(gmax, std::abs(next));
    }
    run.gx = S;
    if (!std::isfinite(d)) break;
    run.differences.push_back(d);
    if (d <= opt.tol * gmax) {
      run.converged = true;
      break;
    }
  }
  const double floor = 1e-13;
  for (std::size_t i = 0; i + 1 < run.differences.size(); ++i)
    if (run.differences[i] > floor && run.differences[i + 1] > floor)
      run.ratio = std::max(run.ratio, run.differences[i + 1] / run.differences[i]);
  return run;
}

double comparison_exponent(ComparisonProfile::Branch branch, int k, double lambda, Dimension N) {
  const auto e = exponents(lambda + omega(k, N), N);
  return branch == ComparisonProfile::Branch::Plus ? e.plus : e.minus;
}

}  // namespace

ComparisonProfile::ComparisonProfile(Branch branch, int k, double lambda, Dimension N)
    : branch_(branch),
      exponent_(comparison_exponent(branch, k, lambda, N)),
      log_corrected_(branch == Branch::Minus && k == 0 && is_critical_lambda(lambda, N)) {}

double ComparisonProfile::operator()(double r) const {
  const double v = std::pow(r, exponent_);
  return log_corrected_ ? v * std::abs(std::log(r / 2.0)) : v;
}

double ComparisonProfile::derivative(double r) const {
  const double v = std::pow(r, exponent_ - 1.0);
  if (!log_corrected_) return exponent_ * v;
  const double L = std::log(r / 2.0);
  return v * (exponent_ * std::abs(L) + (L > 0.0 ? 1.0 : -1.0));
}

double HarmonicProfile::normalized(double r) const {
  if (r < r_min()) return 1.0 + (g.front() - 1.0) * std::pow(r / r_min(), rho1);
  if (r > r_max() * (1.0 + 1e-12))
    throw std::domain_error("radius beyond the profile range");
  return interpolate_cubic(grid, g, std::log(r));
}

double HarmonicProfile::value(double r) const {
  return std::pow(r, exponents.A1k) * normalized(r);
}

double HarmonicProfile::derivative(double r) const {
  const double A = exponents.A1k;
  double gv, gd;
  if (r < r_min()) {
    const double s = std::pow(r / r_min(), rho1);
    gv = 1.0 + (g.front() - 1.0) * s;
    gd = (g.front() - 1.0) * rho1 * s;
  } else {
    gv = normalized(r);
    gd = interpolate_cubic(grid, gx, std::log(r));
  }
  return std::pow(r, A - 1.0) * (A * gv + gd);
}

double HarmonicProfile::far_shape(double r) const {
  const double v = std::pow(r, exponents.A2k);
  return exponents.Bk == 1 ? v * std::log(r) : v;
}

HarmonicProfile solve_profile(const PotentialSpec& spec, int k, const ProfileOptions& opt) {
  if (k < 0) throw std::invalid_argument("mode index must be >= 0");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  HarmonicProfile p;
  p.k = k;
  p.N = spec.N;
  p.exponents = mode_exponents(k, spec);
  p.lambda1 = spec.lambda1;
  p.lambda2 = spec.lambda2;
  p.rho1 = spec.rho1;
  p.criticality = spec.criticality;
  p.grid = LogGrid::span(opt.r_min, opt.r_max, opt.per_decade);

  const LogGrid& grid = p.grid;
  const long n = static_cast<long>(grid.size());
  const double A = p.exponents.A1k;
  const double b = spec.N.as_double() - 2.0 + 2.0 * A;
  const int refine = std::max(1, opt.picard_refine);
  const long per_decade = std::max(1L, std::lround(kLn10 / grid.dx));
  const long shrink = std::max(1L, std::lround(0.3 * per_decade));

  long top = std::lround((std::log(std::min(opt.picard_start, opt.r_max)) - grid.x[0]) / grid.dx);
  top = std::min(top, n - 1);

  PicardRun run;
  long low = 0;
  for (;;) {
    const double x_top = grid.x[0] + grid.dx * static_cast<double>(top);
    if (std::exp(x_top) < 1e-8) {
      std::ostringstream msg;
      msg << "no Picard radius >= 1e-8 reaches contraction 1/2 for k=" << k;
      throw ContractionFailure(msg.str());
    }
    low = std::min(0L, top) - 4 * per_decade;
    const auto cells = static_cast<std::size_t>((top - low) * refine);
    const LogGrid fine = LogGrid::from_log(grid.x[0] + grid.dx * static_cast<double>(low),
                                           grid.dx / refine, cells + 1);
    run = picard_iterate(spec, b, fine, opt);
    if (run.converged && run.ratio <= 0.5) break;
    top -= shrink;
  }

  p.picard_radius = run.grid.r.back();
  p.picard_ratio = run.ratio;
  p.picard_iterations = static_cast<int>(run.differences.size());
  p.picard_first_difference = run.differences.empty() ? 0.0 : run.differences.front();

  p.g.assign(grid.size(), 0.0);
  p.gx.assign(grid.size(), 0.0);
  for (long i = 0; i <= std::min(top, n - 1); ++i) {
    const auto j = static_cast<std::size_t>((i - low) * refine);
    p.g[i] = run.g[j];
    p.gx[i] = run.gx[j];
  }

  const ContinuationOde ode(spec, b, std::max(opt.tol, 1e-14) * 10.0);
  const std::size_t fine_top = run.grid.size() - 1;

  // Re-derive the top of the Picard interval from one decade below it.
  {
    const std::size_t back = std::min<std::size_t>(fine_top, per_decade * refine);
    const std::size_t from = fine_top - back;
    if (back > 0) {
      const double xt = run.grid.x[fine_top];
      int steps = 0;
      const auto y = ode.integrate(run.grid.x[from], {run.g[from], run.gx[from]},
                                   std::span<const double>(&xt, 1), grid.dx, steps);
      const double gt = run.g[fine_top], dt = run.gx[fine_top];
      p.matching_mismatch = std::max(std::abs(y[0][0] - gt) / std::abs(gt),
                                     std::abs(y[0][1] - dt) / (std::abs(A * gt + dt) + std::abs(gt)));
    }
  }

  if (top < n - 1) {
    const long first = std::max(top + 1, 0L);
    std::vector<double> stops(grid.x.begin() + first, grid.x.end());
    int steps = 0;
    const auto ys = ode.integrate(run.grid.x[fine_top], {run.g[fine_top], run.gx[fine_top]},
                                  stops, grid.dx, steps);
    p.ode_steps = steps;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      p.g[first + i] = ys[i][0];
      p.gx[first + i] = ys[i][1];
    }
  }

  p.h.resize(grid.size());
  p.dh.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(p.g[i] > 0.0)) {
      std::ostringstream msg;
      msg << "h_" << k << " changes sign near r=" << grid.r[i];
      throw NotNonnegative(msg.str());
    }
    const double r = grid.r[i];
    p.h[i] = std::pow(r, A) * p.g[i];
    p.dh[i] = std::pow(r, A - 1.0) * (A * p.g[i] + p.gx[i]);
  }
  return p;
}

CkFit fit_ck(const HarmonicProfile& profile) {
  std::vector<double> ratios;
  const double from = std::max(profile.r_max() / 10.0, 1.0 + 1e-9);
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const double r = profile.grid.r[i];
    if (r >= from) ratios.push_back(profile.h[i] / profile.far_shape(r));
  }
  if (ratios.empty()) throw AsymptoticNotReached("profile does not extend beyond r=1");
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  CkFit fit;
  fit.c_k = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  for (double q : ratios) fit.residual = std::max(fit.residual, std::abs(q - fit.c_k));
  if (fit.residual > 0.05 * std::abs(fit.c_k)) {
    std::ostringstream msg;
    msg << "h/v_k varies by " << fit.residual << " around " << fit.c_k << " on the top decade";
    throw AsymptoticNotReached(msg.str());
  }
  return fit;
}

namespace {

// T = r^{-(N+2A)} int_0^r s^{N-1} h^2 ds / (as a function of x = log r) on the nodes.
std::vector<double> scaled_mass(const HarmonicProfile& p) {
  const double c = p.N.as_double() + 2.0 * p.exponents.A1k;
  std::vector<double> g2(p.g.size());
  for (std::size_t i = 0; i < g2.size(); ++i) g2[i] = p.g[i] * p.g[i];
  return exp_kernel_cumulative(p.grid, g2, c, {}, g2.front() / c);
}

}  // namespace

std::vector<double> weight_fk_nodes(const HarmonicProfile& p) {
  const auto T = scaled_mass(p);
  std::vector<double> u(T.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = T[i] / (p.g[i] * p.g[i]);
  auto F = exp_kernel_cumulative(p.grid, u, 2.0, {}, u.front() / 2.0);
  for (std::size_t i = 0; i < F.size(); ++i) {
    F[i] *= p.grid.r[i] * p.grid.r[i];
    if (!std::isfinite(F[i])) throw QuadratureFailure("f_k is not finite at r=" + std::to_string(p.grid.r[i]));
  }
  return F;
}

double weight_fk(const HarmonicProfile& p, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("weight_fk needs r > 0");
  if (r > p.r_max() * (1.0 + 1e-12)) throw std::domain_error("radius beyond the profile range");
  auto F = weight_fk_nodes(p);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] /= p.grid.r[i] * p.grid.r[i];
  const double scaled = r < p.r_min() ? F.front() : interpolate_cubic(p.grid, F, std::log(r));
  return scaled * r * r;
}

std::vector<double> mass_ratio_nodes(const HarmonicProfile& p) {
  auto T = scaled_mass(p);
  const double scale = static_cast<double>(p.k + 1);
  for (std::size_t i = 0; i < T.size(); ++i) T[i] *= scale / (p.g[i] * p.g[i]);
  return T;
}

AsymptoticReport compare_asymptotics(const HarmonicProfile& p, const AsymptoticCaps& caps) {
  AsymptoticReport rep;
  const double A = p.exponents.A1k;
  const double inf = std::numeric_limits<double>::infinity();
  rep.near_min = inf;
  rep.near_max = 0.0;
  rep.far_min = inf;
  rep.far_max = 0.0;
  rep.sandwich_min = inf;
  rep.sandwich_max = 0.0;
  rep.far_from = p.exponents.Bk == 1 ? 2.0 : 1.0;
  rep.has_sandwich = p.k >= 1;

  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const double r = p.grid.r[i];
    const double g = p.g[i];
    if (r <= 1.0) {
      rep.near_min = std::min(rep.near_min, g);
      rep.near_max = std::max(rep.near_max, g);
      const double s = std::pow(r, p.rho1);
      rep.near_rate_constant = std::max(rep.near_rate_constant, std::abs(g - 1.0) / s);
      rep.near_rate_derivative =
          std::max(rep.near_rate_derivative, std::abs(A * (g - 1.0) + p.gx[i]) / s);
    }
    if (r >= rep.far_from) {
      const double q = p.h[i] / p.far_shape(r);
      rep.far_min = std::min(rep.far_min, q);
      rep.far_max = std::max(rep.far_max, q);
    }
    if (rep.has_sandwich) {
      const double q = (A * g + p.gx[i]) / (p.k * g);
      rep.sandwich_min = std::min(rep.sandwich_min, q);
      rep.sandwich_max = std::max(rep.sandwich_max, q);
    }
  }

  auto fail = [&](const std::string& what) {
    rep.pass = false;
    rep.failures.push_back(what);
  };
  const double C = caps.ratio_cap;
  if (rep.near_max > 0.0 && (rep.near_max > C || rep.near_min < 1.0 / C))
    fail("h/v+ leaves [1/C, C] on (0,1]");
  if (rep.far_max > 0.0 && (rep.far_max > C || rep.far_min < 1.0 / C))
    fail("h/v_k leaves [1/C, C] on the far range");
  if (rep.near_rate_constant > caps.near_rate_cap || rep.near_rate_derivative > caps.near_rate_cap)
    fail("|h - v+| exceeds the r^rho1 envelope cap");
  if (rep.has_sandwich) {
    const double D = caps.derivative_cap;
    if (rep.sandwich_max > D || rep.sandwich_min < 1.0 / D)
      fail("r h'/(k h) leaves [1/C, C]");
  }
  if (rep.far_max == 0.0) rep.far_min = 0.0;
  if (rep.near_max == 0.0) rep.near_min = 0.0;
  if (!rep.has_sandwich) rep.sandwich_min = 0.0;
  return rep;
}

int find_kstar(const PotentialSpec& spec, int k_max, const ProfileOptions& options) {
  AsymptoticCaps caps;
  caps.derivative_cap = 2.0;
  int kstar = -1;
  for (int k = k_max; k >= 1; --k) {
    const auto rep = compare_asymptotics(solve_profile(spec, k, options), caps);
    if (rep.sandwich_max > caps.derivative_cap || rep.sandwich_min < 1.0 / caps.derivative_cap)
      break;
    kstar = k;
  }
  return kstar;
}

double ode_residual(const HarmonicProfile& p, const PotentialSpec& spec) {
  static constexpr double c[4] = {0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  const double A = p.exponents.A1k;
  const double b = p.N.as_double() - 2.0 + 2.0 * A;
  const double lk = spec.lambda1 + p.exponents.omega_k;
  double worst = 0.0;
  for (std::size_t i = 3; i + 3 < p.grid.size(); ++i) {
    double gxx = 0.0;
    for (int m = 1; m <= 3; ++m) gxx += c[m] * (p.gx[i + m] - p.gx[i - m]);
    gxx /= p.grid.dx;
    const double r = p.grid.r[i];
    const double W = spec.scaled_deviation(r);
    const double scale = std::pow(r, A - 2.0);
    const double res = scale * std::abs(gxx + b * p.gx[i] - W * p.g[i]);
    const double Vh = scale * std::abs(lk + W) * p.g[i];
    worst = std::max(worst, res / (1e-6 * Vh + 1e-10));
  }
  return worst;
}

PicardOperatorResult picard_operator(int k, double lambda, Dimension N, const RadialFunction& f,
                                     double epsilon, double M, std::span<const double> radii) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(M > 0.0)) throw std::invalid_argument("envelope constant must be positive");
  const double A = exponents(lambda + omega(k, N), N).plus;
  const double a1 = N.as_double() - 2.0 + epsilon + 2.0 * A;  // a + 1 with a the inner power
  auto phi = [&](double tau) { return f(tau) / std::pow(tau, -2.0 + epsilon + A); };

  PicardOperatorResult res;
  res.radii.assign(radii.begin(), radii.end());
  if (radii.empty()) return res;

  const double r_hi = *std::max_element(radii.begin(), radii.end());
  const double r_lo = *std::min_element(radii.begin(), radii.end());
  std::vector<double> probe(radii.begin(), radii.end());
  for (const double r : condition_V_grid(std::min(r_lo, r_hi * 1e-8), r_hi, 20)) probe.push_back(r);
  for (const double r : probe) {
    const double q = std::abs(phi(r));
    res.envelope = std::max(res.envelope, q);
    if (!(q <= M * (1.0 + 1e-9))) {
      std::ostringstream msg;
      msg << "|f| / (r^{-2+eps} v+) = " << q << " exceeds M=" << M << " at r=" << r;
      throw EnvelopeViolation(msg.str());
    }
  }

  using boost::math::quadrature::gauss_kronrod;
  constexpr double kTol = 1e-10;
  // u = e^{-y}: the weight e^{-y} bounds the tail beyond kCut by M e^{-kCut}
  constexpr double kCut = 40.0;
  for (const double r : radii) {
    double inner_err_max = 0.0;
    auto J = [&](double s) {
      double err = 0.0;
      const double v = gauss_kronrod<double, 15>::integrate(
          [&](double y) { return phi(s * std::exp(-y / a1)) * std::exp(-y); }, 0.0, kCut, 15, 1e-13, &err);
      inner_err_max = std::max(inner_err_max, 0.5 * kCut * err);  // error is reported on [-1, 1]
      return v;
    };
    double err = 0.0;
    const double I = gauss_kronrod<double, 15>::integrate(
        [&](double y) { return J(r * std::exp(-y / epsilon)) * std::exp(-y); }, 0.0, kCut, 15, 1e-12, &err);
    err *= 0.5 * kCut;
    const double scale = std::max(std::abs(I), M * 1e-3);
    if (!std::isfinite(I) || err > kTol * scale || inner_err_max > kTol * M) {
      std::ostringstream msg;
      msg << "nested quadrature error " << std::max(err, inner_err_max) << " at r=" << r;
      throw QuadratureFailure(msg.str());
    }
    const double F = std::pow(r, A + epsilon) * I / (epsilon * a1);
    res.values.push_back(F);
    res.observed_constant = std::max(
        res.observed_constant, std::abs(F) * (k + 1) / (M * std::pow(r, epsilon + A)));
  }
  return res;
}

}  // namespace hardy

#include "hardy/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include "hardy/errors.hpp"
#include "hardy/harmonic_profile.hpp"
#include "hardy/log_grid.hpp"

namespace hardy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using boost::math::quadrature::gauss_kronrod;

template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-13) {
  double err = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &err);
}

// Bisection-adaptive Gauss-Kronrod with an absolute error target; roundoff in
// level-set integrands makes purely relative targets unreachable.
template <class F>
double integrate_abs(F& f, double a, double b, double abs_tol, int depth = 12) {
  double err = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err);
  err *= 0.5 * (b - a);  // the reported error refers to the interval mapped onto [-1, 1]
  if (err <= abs_tol || depth == 0) return v;
  const double m = 0.5 * (a + b);
  return integrate_abs(f, a, m, 0.5 * abs_tol, depth - 1) + integrate_abs(f, m, b, 0.5 * abs_tol, depth - 1);
}

// |f| on [a, b] as one monotone function: c (r / r0)^e or f0 + slope (r - r0).
struct Piece {
  double a = 0.0, b = 0.0;
  bool power = true;
  double c = 0.0, e = 0.0;
  double r0 = 0.0, f0 = 0.0, slope = 0.0;

  double at(double r) const {
    if (power) {
      if (r == 0.0) return e > 0.0 ? 0.0 : (e < 0.0 ? kInf : c);
      if (r == kInf) return e < 0.0 ? 0.0 : (e > 0.0 ? kInf : c);
      return c * std::pow(r / r0, e);
    }
    return std::max(0.0, f0 + slope * (r - r0));
  }
  double fa() const { return at(a); }
  double fb() const { return at(b); }
  double invert(double lam) const {
    return power ? r0 * std::pow(lam / c, 1.0 / e) : r0 + (lam - f0) / slope;
  }
  bool constant() const { return power ? e == 0.0 : slope == 0.0; }
};

double shell_volume(double lo, double hi, double alpha, double n) {
  if (hi == kInf) return kInf;
  return alpha * (std::pow(hi, n) - std::pow(lo, n));
}

// {r in piece : |f| > lam} as an interval.
std::pair<double, double> above(const Piece& P, double lam) {
  const double fa = P.fa(), fb = P.fb();
  if (P.constant()) return fa > lam ? std::pair{P.a, P.b} : std::pair{P.a, P.a};
  const bool decreasing = fa > fb;
  const double top = decreasing ? fa : fb;
  const double bottom = decreasing ? fb : fa;
  if (lam >= top) return {P.a, P.a};
  if (lam < bottom) return {P.a, P.b};
  const double r = std::clamp(P.invert(lam), P.a, P.b);
  return decreasing ? std::pair{P.a, r} : std::pair{r, P.b};
}

void push_linear(std::vector<Piece>& out, double a, double b, double va, double vb) {
  if (va == 0.0 && vb == 0.0) return;
  auto add = [&](double x0, double x1, double f0, double f1) {
    Piece P;
    P.a = x0;
    P.b = x1;
    P.power = false;
    P.r0 = x0;
    P.f0 = f0;
    P.slope = (f1 - f0) / (x1 - x0);
    out.push_back(P);
  };
  if (va * vb < 0.0) {
    const double z = a + (b - a) * va / (va - vb);
    add(a, z, std::abs(va), 0.0);
    add(z, b, 0.0, std::abs(vb));
  } else {
    add(a, b, std::abs(va), std::abs(vb));
  }
}

Piece power_piece(double a, double b, double ref, double c, double e) {
  Piece P;
  P.a = a;
  P.b = b;
  P.r0 = ref;
  P.c = c;
  P.e = e;
  return P;
}

// int_lo^hi (r / ref)^{m-1} dr / ref, with lo = 0 or hi = inf allowed.
double scaled_power_integral(double lo, double hi, double ref, double m) {
  if (m == 0.0) return (lo == 0.0 || hi == kInf) ? kInf : std::log(hi / lo);
  const double top = hi == kInf ? (m < 0.0 ? 0.0 : kInf) : std::pow(hi / ref, m);
  const double bottom = lo == 0.0 ? (m > 0.0 ? 0.0 : kInf) : std::pow(lo / ref, m);
  if (!std::isfinite(top) || !std::isfinite(bottom)) return kInf;
  return (top - bottom) / m;
}

std::vector<Piece> pieces(const RadialField& f, double lo, double hi) {
  const auto& r = f.radii();
  const auto& v = f.values();
  std::vector<Piece> raw;
  if (v.front() != 0.0) {
    const double e = f.inner_exponent();
    raw.push_back(power_piece(0.0, r.front(), r.front(), std::abs(v.front()), e));
  }
  for (std::size_t j = 0; j + 1 < r.size(); ++j) {
    if (v[j] * v[j + 1] > 0.0) {
      const double e = std::log(v[j + 1] / v[j]) / std::log(r[j + 1] / r[j]);
      raw.push_back(power_piece(r[j], r[j + 1], r[j], std::abs(v[j]), e));
    } else {
      push_linear(raw, r[j], r[j + 1], v[j], v[j + 1]);
    }
  }
  if (f.outer_exponent() && v.back() != 0.0) {
    const double e = *f.outer_exponent();
    raw.push_back(power_piece(r.back(), kInf, r.back(), std::abs(v.back()), e));
  }
  std::vector<Piece> out;
  for (Piece P : raw) {
    P.a = std::max(P.a, lo);
    P.b = std::min(P.b, hi);
    if (P.b > P.a) out.push_back(P);
  }
  return out;
}

std::pair<double, double> region_bounds(const Region& region) {
  switch (region.kind) {
    case Region::Kind::Whole: return {0.0, kInf};
    case Region::Kind::Ball: return {0.0, region.outer};
    case Region::Kind::Exterior: return {region.inner, kInf};
    case Region::Kind::Annulus: return {region.inner, region.outer};
  }
  return {0.0, kInf};
}

std::vector<double> unique_levels(std::vector<double> levels) {
  std::erase_if(levels, [](double x) { return !(x > 0.0) || !std::isfinite(x); });
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

// Contribution of the whole piece to mu: A - lambda B.
struct Moments {
  double A = 0.0, B = 0.0;
};

// mu(lambda) = sum over pieces, bucketed by level interval so that only the
// pieces straddling lambda are evaluated.
template <class Partial>
std::function<double(double)> indexed_mu(std::vector<Piece> ps, const std::vector<double>& levels,
                                         const std::vector<Moments>& moments, Partial partial) {
  const long m = static_cast<long>(levels.size());
  auto index = [&](double v) -> long {
    if (!(v > 0.0)) return -1;
    if (v == kInf) return m;
    return std::lower_bound(levels.begin(), levels.end(), v) - levels.begin();
  };
  std::vector<double> fullA(m + 2, 0.0), fullB(m + 2, 0.0);
  std::vector<std::vector<int>> cross(m + 1);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double fa = ps[i].fa(), fb = ps[i].fb();
    const long lo = index(std::min(fa, fb));
    const long hi = index(std::max(fa, fb));
    if (lo >= 0 && lo <= m) {
      fullA[lo] += moments[i].A;
      fullB[lo] += moments[i].B;
    }
    for (long b = lo + 1; b <= std::min(hi, m); ++b) cross[b].push_back(static_cast<int>(i));
  }
  for (long b = m; b-- > 0;) {
    fullA[b] += fullA[b + 1];
    fullB[b] += fullB[b + 1];
  }
  return [ps = std::move(ps), levels, fullA = std::move(fullA), fullB = std::move(fullB),
          cross = std::move(cross), partial](double lam) {
    const auto b = static_cast<std::size_t>(std::upper_bound(levels.begin(), levels.end(), lam) - levels.begin());
    double v = fullB[b] != 0.0 ? fullA[b] - lam * fullB[b] : fullA[b];
    for (int i : cross[b]) v += partial(ps[i], lam);
    return v;
  };
}

// Level data of |f| given as monotone pieces carrying the weight alpha r^N.
LevelData radial_level_data(std::vector<Piece> ps, Dimension N) {
  const double alpha = unit_ball_volume(N);
  const double n = N.as_double();
  LevelData d;
  std::vector<double> levels;
  std::vector<Moments> moments;
  d.sup = 0.0;
  d.measure = 0.0;
  for (const Piece& P : ps) {
    const double fa = P.fa(), fb = P.fb();
    levels.push_back(fa);
    levels.push_back(fb);
    d.sup = std::max({d.sup, fa, fb});
    const double vol = shell_volume(P.a, P.b, alpha, n);
    moments.push_back({vol, 0.0});
    if (fa > 0.0 || fb > 0.0) d.measure += vol;
    if (P.power && P.a == 0.0 && P.e < 0.0) {
      d.log_top_coeff = std::log(alpha) + n * std::log(P.r0) - n / P.e * std::log(P.c);
      d.top_exponent = n / P.e;
    }
    if (P.power && P.b == kInf && P.c > 0.0)
      d.bottom_exponent = P.e < 0.0 ? n / P.e : kInf;
  }
  d.levels = unique_levels(std::move(levels));
  d.mu = indexed_mu(std::move(ps), d.levels, moments, [alpha, n](const Piece& P, double lam) {
    const auto [lo, hi] = above(P, lam);
    return hi > lo ? shell_volume(lo, hi, alpha, n) : 0.0;
  });
  return d;
}

// lim mu(lambda) as lambda increases to L.
double mu_left(const LevelData& d, double L) { return d.mu(L * (1.0 - 4e-16)); }

double sup_norm_weak(const LevelData& d, double P) {
  auto value = [&](double lam) { return lam * std::pow(d.mu(lam), 1.0 / P); };
  double best = 0.0;
  for (double L : d.levels) best = std::max(best, L * std::pow(mu_left(d, L), 1.0 / P));
  auto maximize = [&](double x0, double x1) {
    const auto res = boost::math::tools::brent_find_minima(
        [&](double x) { return -value(std::exp(x)); }, x0, x1, 40);
    best = std::max(best, -res.second);
  };
  for (std::size_t i = 0; i + 1 < d.levels.size(); ++i)
    maximize(std::log(d.levels[i]), std::log(d.levels[i + 1]));
  if (!d.levels.empty()) maximize(std::log(d.levels.front()) - 60.0, std::log(d.levels.front()));
  return best;
}

}  // namespace

RadialField::RadialField(std::vector<double> radii, std::vector<double> values, Dimension N,
                         double inner_exponent, std::optional<double> outer_exponent)
    : r_(std::move(radii)), v_(std::move(values)), N_(N), inner_(inner_exponent), outer_(outer_exponent) {
  if (r_.empty() || r_.size() != v_.size())
    throw std::invalid_argument("RadialField needs matching, non-empty radii and values");
  for (std::size_t i = 0; i < r_.size(); ++i) {
    if (!(r_[i] > 0.0) || (i > 0 && !(r_[i] > r_[i - 1])))
      throw std::invalid_argument("RadialField radii must be positive and strictly increasing");
    if (!std::isfinite(v_[i])) throw std::invalid_argument("RadialField values must be finite");
  }
  if (outer_ && !std::isfinite(*outer_)) throw std::invalid_argument("outer exponent must be finite");
}

RadialField RadialField::sample(const std::function<double(double)>& f, double r_lo, double r_hi,
                                int per_decade, Dimension N, double inner_exponent,
                                std::optional<double> outer_exponent) {
  const auto grid = LogGrid::span(r_lo, r_hi, per_decade);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.r[i]);
  return RadialField(grid.r, std::move(v), N, inner_exponent, outer_exponent);
}

RadialField RadialField::power_law(double A, double R, Dimension N) {
  return RadialField({R}, {std::pow(R, A)}, N, A);
}

RadialField RadialField::indicator(double R, Dimension N) { return RadialField({R}, {1.0}, N, 0.0); }

double RadialField::operator()(double r) const {
  if (r <= r_.front()) return v_.front() * std::pow(r / r_.front(), inner_);
  if (r > r_.back()) return outer_ ? v_.back() * std::pow(r / r_.back(), *outer_) : 0.0;
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  const std::size_t j = static_cast<std::size_t>(it - r_.begin()) - 1;
  if (j + 1 >= r_.size()) return v_.back();
  if (v_[j] * v_[j + 1] > 0.0)
    return v_[j] * std::pow(v_[j + 1] / v_[j], std::log(r / r_[j]) / std::log(r_[j + 1] / r_[j]));
  return v_[j] + (v_[j + 1] - v_[j]) * (r - r_[j]) / (r_[j + 1] - r_[j]);
}

RadialField RadialField::dilated(double s) const {
  std::vector<double> r = r_;
  for (double& x : r) x *= s;
  return RadialField(std::move(r), v_, N_, inner_, outer_);
}

RadialField RadialField::scaled(double c) const {
  std::vector<double> v = v_;
  for (double& x : v) x *= c;
  return RadialField(r_, std::move(v), N_, inner_, outer_);
}

LevelData level_data(const RadialField& f, const Region& region) {
  const auto [lo, hi] = region_bounds(region);
  return radial_level_data(pieces(f, lo, hi), f.dimension());
}

Rearrangement::Rearrangement(LevelData data) : data_(std::move(data)) {}

double Rearrangement::operator()(double s) const {
  const auto& d = data_;
  if (d.levels.empty() || !(s >= 0.0)) return d.levels.empty() ? 0.0 : d.sup;
  if (s >= d.measure) return 0.0;
  const auto& L = d.levels;
  if (d.sup == kInf && s < d.mu(L.back()))
    return std::exp((std::log(s) - d.log_top_coeff) / d.top_exponent);
  // smallest level with mu(level) <= s
  std::size_t lo = 0, hi = L.size() - 1;
  if (d.mu(L[hi]) > s) return L[hi];
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (d.mu(L[mid]) <= s) hi = mid; else lo = mid + 1;
  }
  double a = hi == 0 ? 0.0 : L[hi - 1];
  double b = L[hi];
  if (hi == 0) {
    // log-bisection towards 0 handles power tails at small levels
    a = b;
    for (int i = 0; i < 200 && d.mu(a) <= s; ++i) a *= 0.5;
    if (d.mu(a) <= s) return 0.0;
  }
  for (int i = 0; i < 200 && b - a > 1e-16 * b; ++i) {
    const double m = 0.5 * (a + b);
    if (d.mu(m) <= s) b = m; else a = m;
  }
  return b;
}

double Rearrangement::spherical(double r, Dimension N) const {
  return (*this)(unit_ball_volume(N) * std::pow(r, N.as_double()));
}

double Rearrangement::rearranged_distribution(double lambda) const {
  if ((*this)(0.0) <= lambda) return 0.0;
  double hi = data_.measure;
  if (!std::isfinite(hi)) {
    hi = 1.0;
    while ((*this)(hi) > lambda && hi < 1e300) hi *= 2.0;
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double m = 0.5 * (lo + hi);
    if ((*this)(m) > lambda) lo = m; else hi = m;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> Rearrangement::samples(int per_decade) const {
  std::vector<std::pair<double, double>> out;
  if (data_.levels.empty()) return out;
  const double top = data_.mu(data_.levels.back());
  const double s_hi = std::isfinite(data_.measure) ? data_.measure : data_.mu(data_.levels.front()) * 1e3;
  const double s_lo = std::max(top, s_hi * 1e-12) * 1e-3;
  const auto grid = LogGrid::span(s_lo, s_hi, per_decade);
  for (double s : grid.r) out.emplace_back(s, (*this)(s));
  return out;
}

Rearrangement decreasing_rearrangement(const RadialField& f, const Region& region) {
  return Rearrangement(level_data(f, region));
}

double lorentz_norm(const LevelData& d, Index p, Index sigma) {
  if (!admissible(p, p, sigma, sigma)) {
    std::ostringstream msg;
    msg << "(p, sigma) = (" << p.str() << ", " << sigma.str() << ") is not admissible";
    throw NotAdmissible(msg.str());
  }
  if (p.is_infinite()) return d.sup;
  if (d.levels.empty()) return 0.0;
  const double P = p.value();
  const bool weak = sigma.is_infinite();
  if (d.measure == kInf) {
    if (d.bottom_exponent == kInf) return kInf;
    const double q = 1.0 + d.bottom_exponent / P;
    if (weak ? q < 0.0 : q <= 0.0) return kInf;
  }
  if (d.sup == kInf) {
    const double q = 1.0 + d.top_exponent / P;
    if (weak ? q > 0.0 : q >= 0.0) return kInf;
  }
  if (weak) return sup_norm_weak(d, P);

  const double S = sigma.value();
  const double power = S / P;
  auto integrand = [&](double lam) {
    const double m = d.mu(lam);
    return m > 0.0 ? std::pow(lam, S - 1.0) * std::pow(m, power) : 0.0;
  };
  const auto& L = d.levels;
  const double L0 = L.front();
  auto bottom = [&](double u) {
    const double lam = L0 * std::exp(-u);
    const double m = d.mu(lam);
    return m > 0.0 ? std::pow(lam, S) * std::pow(m, power) : 0.0;
  };
  const double rate = d.measure == kInf ? S * (1.0 + d.bottom_exponent / P) : S;
  // past u_max mu is a pure power to roundoff and the rest is integrated in closed form
  double u_max = 40.0 / rate;
  if (d.measure == kInf) u_max = std::min(u_max, std::log(1e16) / -d.bottom_exponent);

  // a coarse pass sets the absolute target of the adaptive pass
  double err = 0.0, scale = 0.0;
  scale += std::abs(gauss_kronrod<double, 31>::integrate(bottom, 0.0, u_max, 0, 0.0, &err));
  for (std::size_t i = 0; i + 1 < L.size(); ++i)
    scale += std::abs(gauss_kronrod<double, 31>::integrate(integrand, L[i], L[i + 1], 0, 0.0, &err));
  const double tol = 1e-14 * scale;
  // mu^{sigma/p} vanishes like a fractional power as lambda -> sup
  boost::math::quadrature::tanh_sinh<double> singular;
  const bool bounded = std::isfinite(d.sup);
  double total = bounded && L.size() == 1 ? singular.integrate(bottom, 0.0, u_max, 1e-14)
                                          : integrate_abs(bottom, 0.0, u_max, tol);
  total += bottom(u_max) / rate;
  for (std::size_t i = 0; i + 1 < L.size(); ++i) {
    const double a = L[i], b = L[i + 1];
    if (bounded && i + 2 == L.size() && b - a > 1e-12 * b)
      total += singular.integrate(integrand, a, b, 1e-14);
    else if (d.affine_between_levels)
      total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 0, 0.0, &err);
    else
      total += integrate_abs(integrand, a, b, tol);
  }
  if (d.sup == kInf) {
    const double g = S + S * d.top_exponent / P;
    total += std::exp(power * d.log_top_coeff + g * std::log(L.back())) / (-g);
  }
  return std::pow(P * total, 1.0 / S);
}

double lorentz_norm(const RadialField& f, Index p, Index sigma, const Region& region) {
  return lorentz_norm(level_data(f, region), p, sigma);
}

double lp_norm_direct(const RadialField& f, double p, const Region& region) {
  const auto [lo, hi] = region_bounds(region);
  const double n = f.dimension().as_double();
  double total = 0.0;
  for (const Piece& P : pieces(f, lo, hi)) {
    if (P.power) {
      total += std::pow(P.c, p) * std::pow(P.r0, n) * scaled_power_integral(P.a, P.b, P.r0, p * P.e + n);
      if (!std::isfinite(total)) return kInf;
    } else {
      total += integrate([&](double r) { return std::pow(P.at(r), p) * std::pow(r, n - 1.0); },
                         P.a, P.b, 1e-14);
    }
  }
  return std::pow(unit_sphere_area(f.dimension()) * total, 1.0 / p);
}

double harmonic_factor(int k, Dimension N) {
  if (k == 0) return 1.0 / std::sqrt(unit_sphere_area(N));
  if (k == 1 && N.value() == 3) return std::sqrt(3.0 / (4.0 * std::numbers::pi));
  std::ostringstream msg;
  msg << "angular factor for k=" << k << " in N=" << N.value() << " is not implemented";
  throw UnsupportedMode(msg.str());
}

ModalField::ModalField(Dimension N, std::vector<ModalComponent> components)
    : N_(N), components_(std::move(components)) {
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& m = components_[c];
    if (!(m.field.dimension() == N)) throw std::invalid_argument("modal component dimension mismatch");
    harmonic_factor(m.k, N);
    if (m.k == 0 && m.i == 1) {
      if (radial_ >= 0) throw std::invalid_argument("duplicate (k, i) = (0, 1)");
      radial_ = static_cast<int>(c);
    } else if (m.k == 1 && m.i == 1) {
      if (polar_ >= 0) throw std::invalid_argument("duplicate (k, i) = (1, 1)");
      polar_ = static_cast<int>(c);
    } else {
      std::ostringstream msg;
      msg << "mode (k, i) = (" << m.k << ", " << m.i << ") is not implemented";
      throw UnsupportedMode(msg.str());
    }
  }
}

double ModalField::radial_part(double r) const {
  return radial_ >= 0 ? harmonic_factor(0, N_) * radial_field()(r) : 0.0;
}

double ModalField::polar_part(double r) const {
  return polar_ >= 0 ? harmonic_factor(1, N_) * polar_field()(r) : 0.0;
}

double ModalField::operator()(double r, double cos_theta) const {
  return radial_part(r) + polar_part(r) * cos_theta;
}

namespace {

// int_lo^hi r^2 / |f| dr on one piece.
double inverse_moment(const Piece& P, double lo, double hi) {
  if (!P.power) return integrate([&](double r) { return r * r / P.at(r); }, lo, hi);
  return P.r0 * P.r0 * P.r0 / P.c * scaled_power_integral(lo, hi, P.r0, 3.0 - P.e);
}

// Single k = 1 mode in N = 3: the cap {|b| cos > lambda} has measure
// 2 (1 - lambda/|b|)_+, so mu = 4 pi int r^2 (1 - lambda/|b|)_+ dr.
LevelData polar_level_data(const RadialField& v, double q) {
  auto ps = pieces(v.scaled(q), 0.0, kInf);
  const double four_pi = 4.0 * std::numbers::pi;
  LevelData d = radial_level_data(ps, Dimension(3));
  if (d.sup == kInf) {
    const double e = 3.0 / d.top_exponent;
    d.log_top_coeff += std::log(-e / (3.0 - e));
  }
  std::vector<Moments> moments;
  for (const Piece& P : ps)
    moments.push_back({four_pi * (P.b == kInf ? kInf : (P.b * P.b * P.b - P.a * P.a * P.a) / 3.0),
                       four_pi * inverse_moment(P, P.a, P.b)});
  d.mu = indexed_mu(std::move(ps), d.levels, moments, [four_pi](const Piece& P, double lam) {
    const auto [lo, hi] = above(P, lam);
    if (!(hi > lo)) return 0.0;
    if (hi == kInf) return kInf;
    return four_pi * ((hi * hi * hi - lo * lo * lo) / 3.0 - lam * inverse_moment(P, lo, hi));
  });
  return d;
}

}  // namespace

LevelData level_data(const ModalField& f) {
  const Dimension N = f.dimension();
  if (!f.has_polar()) {
    if (!f.has_radial()) return radial_level_data({}, N);
    return level_data(f.radial_field().scaled(harmonic_factor(0, N)));
  }
  const double qb = harmonic_factor(1, N);
  if (!f.has_radial()) return polar_level_data(f.polar_field(), qb);

  const RadialField& va = f.radial_field();
  const RadialField& vb = f.polar_field();
  if (va.outer_exponent() || vb.outer_exponent())
    throw UnsupportedMode("mixed modal fields need compact radial support");
  if (va.inner_exponent() < 0.0 || vb.inner_exponent() < 0.0)
    throw UnsupportedMode("mixed modal fields need bounded radial parts");
  const double qa = harmonic_factor(0, N);
  std::vector<double> nodes = va.radii();
  nodes.insert(nodes.end(), vb.radii().begin(), vb.radii().end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  nodes.insert(nodes.begin(), 0.0);

  // Gauss atoms in r carry |a|, |b| and the shell weight w = 2 pi r^2 dr. For
  // one atom the angular measure of {|a + b cos| > lam} is piecewise linear
  // in lam: c0 - lam c1 below low = ||a| - |b||, d0 - lam d1 up to high =
  // |a| + |b|. Atoms with negligible |b| act as jumps at |a|. mu is assembled
  // from suffix sums over atoms sorted by low and by high.
  struct Term {
    double at, value, slope;
    bool operator<(const Term& o) const { return at < o.at; }
  };
  std::vector<Term> low_terms, high_terms;
  std::vector<double> levels;
  LevelData d;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const double lo = nodes[j], h = nodes[j + 1] - nodes[j];
    for (int q = 0; q < kCellGaussPoints; ++q) {
      const double r = lo + h * detail::kGaussNodes[q];
      const double A = std::abs(qa * va(r)), B = std::abs(qb * vb(r));
      const double w = two_pi * h * detail::kGaussWeights[q] * r * r;
      if (A + B == 0.0) continue;
      d.sup = std::max(d.sup, A + B);
      d.measure += 2.0 * w;
      if (B < 1e-8 * A) {
        low_terms.push_back({A, 2.0 * w, 0.0});
        levels.push_back(A);
        continue;
      }
      const double c0 = 2.0 * w, c1 = A >= B ? 0.0 : 2.0 * w / B;
      const double d0 = w * (A + B) / B, d1 = w / B;
      low_terms.push_back({std::abs(A - B), c0 - d0, c1 - d1});
      high_terms.push_back({A + B, d0, d1});
      levels.push_back(std::abs(A - B));
      levels.push_back(A + B);
    }
  }
  struct Suffix {
    std::vector<double> at, value, slope;
    explicit Suffix(std::vector<Term> t) {
      std::sort(t.begin(), t.end());
      at.resize(t.size());
      value.assign(t.size() + 1, 0.0);
      slope.assign(t.size() + 1, 0.0);
      for (std::size_t i = t.size(); i-- > 0;) {
        at[i] = t[i].at;
        value[i] = value[i + 1] + t[i].value;
        slope[i] = slope[i + 1] + t[i].slope;
      }
    }
    // sum over terms with at > lam of value - lam slope
    double operator()(double lam) const {
      const auto i = static_cast<std::size_t>(std::upper_bound(at.begin(), at.end(), lam) - at.begin());
      return value[i] - lam * slope[i];
    }
  };
  auto low = std::make_shared<Suffix>(std::move(low_terms));
  auto high = std::make_shared<Suffix>(std::move(high_terms));
  d.levels = unique_levels(std::move(levels));
  d.mu = [low, high](double lam) { return std::max(0.0, (*low)(lam) + (*high)(lam)); };
  d.affine_between_levels = true;
  return d;
}

Rearrangement decreasing_rearrangement(const ModalField& f) { return Rearrangement(level_data(f)); }

double lorentz_norm(const ModalField& f, Index p, Index sigma) {
  return lorentz_norm(level_data(f), p, sigma);
}

StepField::StepField(std::vector<double> edges, std::vector<double> values, Dimension N)
    : edges_(std::move(edges)), values_(std::move(values)), N_(N) {
  if (edges_.size() != values_.size() + 1 || values_.empty())
    throw std::invalid_argument("StepField needs one more edge than values");
  if (edges_.front() < 0.0) throw std::invalid_argument("StepField edges must be nonnegative");
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (!(edges_[i] > edges_[i - 1])) throw std::invalid_argument("StepField edges must increase");
}

std::vector<std::pair<double, double>> StepField::rearranged() const {
  const double alpha = unit_ball_volume(N_);
  const double n = N_.as_double();
  std::vector<std::pair<double, double>> shells;  // (|value|, volume)
  for (std::size_t j = 0; j < values_.size(); ++j)
    if (values_[j] != 0.0)
      shells.emplace_back(std::abs(values_[j]), shell_volume(edges_[j], edges_[j + 1], alpha, n));
  std::stable_sort(shells.begin(), shells.end(), [](auto& x, auto& y) { return x.first > y.first; });
  std::vector<std::pair<double, double>> out;
  double S = 0.0;
  for (const auto& [v, vol] : shells) {
    S += vol;
    out.emplace_back(S, v);
  }
  return out;
}

double StepField::lorentz_norm(Index p, Index sigma) const {
  if (!admissible(p, p, sigma, sigma)) throw NotAdmissible("(p, sigma) not admissible");
  const auto steps = rearranged();
  if (steps.empty()) return 0.0;
  if (p.is_infinite()) return steps.front().second;
  const double P = p.value();
  if (sigma.is_infinite()) {
    double best = 0.0;
    for (const auto& [S, v] : steps) best = std::max(best, v * std::pow(S, 1.0 / P));
    return best;
  }
  const double s = sigma.value();
  double total = 0.0, prev = 0.0;
  for (const auto& [S, v] : steps) {
    const double cur = std::pow(S, s / P);
    total += std::pow(v, s) * (P / s) * (cur - prev);
    prev = cur;
  }
  return std::pow(total, 1.0 / s);
}

double product_integral(const StepField& f, const StepField& g) {
  const double alpha = unit_ball_volume(f.dimension());
  const double n = f.dimension().as_double();
  const auto& ef = f.edges();
  const auto& eg = g.edges();
  double total = 0.0;
  std::size_t i = 0, j = 0;
  while (i < f.values().size() && j < g.values().size()) {
    const double lo = std::max(ef[i], eg[j]);
    const double hi = std::min(ef[i + 1], eg[j + 1]);
    if (hi > lo) total += std::abs(f.values()[i] * g.values()[j]) * shell_volume(lo, hi, alpha, n);
    if (ef[i + 1] < eg[j + 1]) ++i; else ++j;
  }
  return total;
}

double rearranged_product_integral(const StepField& f, const StepField& g) {
  const auto a = f.rearranged();
  const auto b = g.rearranged();
  double total = 0.0, s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double next = std::min(a[i].first, b[j].first);
    total += a[i].second * b[j].second * (next - s);
    s = next;
    if (a[i].first == next) ++i;
    if (j < b.size() && b[j].first == next) ++j;
  }
  return total;
}

RearrangementReport check_rearrangement_inequalities(int trials, Dimension N, Index p, Index sigma,
                                                     std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> radius(0.0, 2.0);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  auto random_field = [&] {
    const int m = count(rng);
    std::vector<double> e(m + 1);
    for (double& x : e) x = radius(rng);
    std::sort(e.begin(), e.end());
    for (std::size_t i = 1; i < e.size(); ++i) e[i] = std::max(e[i], e[i - 1] + 1e-3);
    std::vector<double> v(m);
    for (double& x : v) x = value(rng);
    return StepField(std::move(e), std::move(v), N);
  };
  RearrangementReport rep;
  rep.trials = trials;
  const Index pc = p.conjugate(), sc = sigma.conjugate();
  for (int t = 0; t < trials; ++t) {
    const StepField f = random_field();
    const StepField g = random_field();
    const double lhs = product_integral(f, g);
    const double rhs = rearranged_product_integral(f, g);
    if (lhs > rhs * (1.0 + 1e-12)) {
      ++rep.violations;
      rep.worst_excess = std::max(rep.worst_excess, (lhs - rhs) / rhs);
    }
    const double denom = f.lorentz_norm(p, sigma) * g.lorentz_norm(pc, sc);
    if (denom > 0.0) rep.empirical_constant = std::max(rep.empirical_constant, lhs / denom);
  }
  return rep;
}

RadialField profile_field(const HarmonicProfile& profile, double R, bool derivative) {
  if (!(R > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (R > profile.r_max() * (1.0 + 1e-12)) throw std::domain_error("ball exceeds the profile range");
  std::vector<double> r, v;
  for (std::size_t i = 0; i < profile.grid.size() && profile.grid.r[i] < R * (1.0 - 1e-12); ++i) {
    r.push_back(profile.grid.r[i]);
    v.push_back(derivative ? profile.dh[i] : profile.h[i]);
  }
  r.push_back(R);
  v.push_back(derivative ? profile.derivative(R) : profile.value(R));
  const double A = profile.exponents.A1k;
  double inner = A;
  if (derivative) inner = std::abs(A) > 1e-12 ? A - 1.0 : profile.rho1 - 1.0;
  return RadialField(std::move(r), std::move(v), profile.N, inner);
}

double norm_ratio_h0(const HarmonicProfile& profile, Index p, Index sigma, double t) {
  const double R = std::sqrt(t);
  return lorentz_norm(profile_field(profile, R), p, sigma, Region::ball(R)) / profile.value(R);
}

}  // namespace hardy

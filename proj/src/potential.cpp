#include "hardy/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hardy/errors.hpp"

namespace hardy {

double PotentialSpec::derivative(double r) const {
  if (dV) return dV(r);
  const double h = r * 1e-6;
  return (V(r + h) - V(r - h)) / (2.0 * h);
}

PotentialSpec make_pure_hardy(double lambda, Dimension N) {
  exponents(lambda, N);  // throws below the Hardy constant
  PotentialSpec s;
  s.N = N;
  s.family = "pure_hardy";
  s.V = [lambda](double r) { return lambda / (r * r); };
  s.dV = [lambda](double r) { return -2.0 * lambda / (r * r * r); };
  s.lambda1 = s.lambda2 = lambda;
  s.rho1 = s.rho2 = 2.0;
  s.criticality = is_critical_lambda(lambda, N) ? Criticality::Critical : Criticality::Subcritical;
  s.C_V = s.C_V_prime = 0.0;
  return s;
}

PotentialSpec make_two_scale(double lambda1, double lambda2, Dimension N,
                             std::optional<Criticality> criticality) {
  exponents(lambda1, N);
  exponents(lambda2, N);
  PotentialSpec s;
  s.N = N;
  s.family = "two_scale";
  const double gap = lambda2 - lambda1;
  // lambda1/r^2 + (lambda2 - lambda1)/(1 + r^2) is the same rational function
  s.V = [lambda1, gap](double r) { return lambda1 / (r * r) + gap / (1.0 + r * r); };
  s.dV = [lambda1, gap](double r) {
    const double q = 1.0 + r * r;
    return -2.0 * lambda1 / (r * r * r) - 2.0 * r * gap / (q * q);
  };
  s.lambda1 = lambda1;
  s.lambda2 = lambda2;
  s.rho1 = s.rho2 = 2.0;
  s.C_V = s.C_V_prime = std::abs(gap);
  if (criticality) {
    s.criticality = *criticality;
  } else {
    s.criticality = (is_critical_lambda(lambda1, N) && is_critical_lambda(lambda2, N))
                        ? Criticality::Critical
                        : Criticality::Subcritical;
  }
  return s;
}

PotentialSpec make_table(std::vector<double> r, std::vector<double> V, Dimension N,
                         Criticality criticality, std::optional<double> lambda1,
                         std::optional<double> lambda2, double rho1, double rho2) {
  if (r.size() != V.size() || r.size() < 2)
    throw std::invalid_argument("table potential needs >= 2 (r, V) rows");
  std::vector<double> x(r.size()), q(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) throw std::invalid_argument("table radii must be positive");
    if (i > 0 && !(r[i] > r[i - 1])) throw std::invalid_argument("table radii must increase");
    x[i] = std::log(r[i]);
    q[i] = r[i] * r[i] * V[i];
  }
  PotentialSpec s;
  s.N = N;
  s.family = "table";
  s.lambda1 = lambda1.value_or(q.front());
  s.lambda2 = lambda2.value_or(q.back());
  exponents(s.lambda1, N);
  exponents(s.lambda2, N);
  s.rho1 = rho1;
  s.rho2 = rho2;
  s.criticality = criticality;

  struct Table {
    std::vector<double> x, q;
    // value and slope of r^2 V in log r
    std::pair<double, double> at(double r) const {
      const double lx = std::log(r);
      if (lx <= x.front()) return {q.front(), 0.0};
      if (lx >= x.back()) return {q.back(), 0.0};
      const auto it = std::upper_bound(x.begin(), x.end(), lx);
      const std::size_t j = static_cast<std::size_t>(it - x.begin()) - 1;
      const double slope = (q[j + 1] - q[j]) / (x[j + 1] - x[j]);
      return {q[j] + slope * (lx - x[j]), slope};
    }
  };
  auto table = std::make_shared<Table>(Table{std::move(x), std::move(q)});
  s.V = [table](double rr) { return table->at(rr).first / (rr * rr); };
  s.dV = [table](double rr) {
    const auto [val, slope] = table->at(rr);
    return (slope - 2.0 * val) / (rr * rr * rr);
  };
  // envelope constants measured on the table itself
  double cv = 0.0, cvp = 0.0;
  for (std::size_t i = 0; i < table->x.size(); ++i) {
    const double rr = std::exp(table->x[i]);
    cv = std::max(cv, std::abs(table->q[i] - s.lambda1) / std::pow(rr, rho1));
    cvp = std::max(cvp, std::abs(table->q[i] - s.lambda2) * std::pow(rr, rho2));
  }
  s.C_V = cv;
  s.C_V_prime = cvp;
  return s;
}

PotentialSpec load_table_csv(const std::string& path, Dimension N, Criticality criticality,
                             std::optional<double> lambda1, std::optional<double> lambda2,
                             double rho1, double rho2) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential table " + path);
  std::vector<double> r, V;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a >> b)) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("malformed row in " + path + ": " + line);
    }
    first = false;
    r.push_back(a);
    V.push_back(b);
  }
  return make_table(std::move(r), std::move(V), N, criticality, lambda1, lambda2, rho1, rho2);
}

double evaluate_mode_potential(const PotentialSpec& spec, int k, double r) {
  return spec.V(r) + omega(k, spec.N) / (r * r);
}

ModeExponents mode_exponents(int k, const PotentialSpec& spec) {
  return mode_exponents(k, spec.N, spec.lambda1, spec.lambda2, spec.criticality);
}

bool check_Nprime(const PotentialSpec& spec) {
  return nprime_holds(spec.N, spec.lambda2, spec.criticality);
}

std::vector<double> condition_V_grid(double lo, double hi, int per_decade) {
  const int n = static_cast<int>(std::ceil(per_decade * std::log10(hi / lo)));
  std::vector<double> r(static_cast<std::size_t>(n) + 1);
  const double step = std::log(hi / lo) / n;
  for (int i = 0; i <= n; ++i) r[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  r.back() = hi;
  return r;
}

namespace {

// Envelope fit of dev(r) against the declared power law r^rate on the points
// selected by the caller. `vanishing_sign` is +1 when dev must vanish as the
// log radius decreases and -1 when it must vanish as it increases.
ClauseResult fit_envelope(const std::string& name, const std::vector<double>& r,
                          const std::vector<double>& dev, double declared_rate, double scale,
                          int vanishing_sign) {
  ClauseResult res;
  res.clause = name;
  double dev_max = 0.0;
  for (double d : dev) dev_max = std::max(dev_max, d);
  if (r.size() < 3) {
    res.pass = false;
    res.detail = "grid does not sample the region";
    return res;
  }
  if (dev_max <= 1e-13 * std::max(1.0, scale)) {
    res.pass = true;
    res.fitted_rate = vanishing_sign * std::numeric_limits<double>::infinity();
    res.detail = "exact inverse-square behaviour";
    return res;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, sum_log_c = 0;
  int n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(dev[i] > 0.0)) continue;
    const double lx = std::log(r[i]), ly = std::log(dev[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    sum_log_c += ly - declared_rate * lx;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  res.fitted_rate = slope;
  res.fitted_constant = std::exp(sum_log_c / n);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ratio = dev[i] / std::pow(r[i], declared_rate);
    if (ratio > res.max_ratio) {
      res.max_ratio = ratio;
      res.violating_radius = r[i];
    }
  }
  const bool vanishes = vanishing_sign > 0 ? slope > 0.0 : slope < 0.0;
  const bool bounded = res.max_ratio <= 2.0 * res.fitted_constant;
  res.pass = vanishes && bounded;
  std::ostringstream msg;
  msg << "fitted log-log slope " << slope << ", max/fit constant ratio "
      << res.max_ratio / res.fitted_constant;
  res.detail = msg.str();
  if (!vanishes) {
    // report the radius where the deviation is worst in the asymptotic direction
    res.violating_radius = vanishing_sign > 0 ? r.front() : r.back();
  }
  return res;
}

}  // namespace

ConditionVReport inspect_condition_V(const PotentialSpec& spec, const std::vector<double>& grid) {
  if (grid.empty() || grid.front() > 1e-6 * (1 + 1e-9) || grid.back() < 1e6 * (1 - 1e-9))
    throw std::invalid_argument("condition (V) grid must span at least [1e-6, 1e6]");
  ConditionVReport rep;
  std::vector<double> r0, d0, r1, d1;
  for (double r : grid) {
    const double q = r * r * spec.V(r);
    if (r <= 1e-2) {
      r0.push_back(r);
      d0.push_back(std::abs(q - spec.lambda1));
    }
    if (r >= 1e2) {
      r1.push_back(r);
      d1.push_back(std::abs(q - spec.lambda2));
    }
  }
  rep.near_zero = fit_envelope("(ii) r->0", r0, d0, spec.rho1, spec.lambda1, +1);
  rep.near_infinity = fit_envelope("(ii) r->inf", r1, d1, -spec.rho2, spec.lambda2, -1);

  ClauseResult& c3 = rep.derivative;
  c3.clause = "(iii) sup r^3|V'|";
  double inner = 0.0, outer = 0.0, r_outer = 0.0;
  bool finite = true;
  for (double r : grid) {
    const double v = std::abs(r * r * r * spec.derivative(r));
    if (!std::isfinite(v)) {
      finite = false;
      c3.violating_radius = r;
      break;
    }
    rep.sup_r3_dV = std::max(rep.sup_r3_dV, v);
    const bool extreme = r < 1e-5 * (1 + 1e-12) || r > 1e5 * (1 - 1e-12);
    if (extreme) {
      if (v > outer) {
        outer = v;
        r_outer = r;
      }
    } else {
      inner = std::max(inner, v);
    }
  }
  c3.fitted_constant = rep.sup_r3_dV;
  c3.max_ratio = inner > 0 ? outer / inner : 0.0;
  c3.pass = finite && outer <= 2.0 * inner + 1e-12;
  if (!c3.pass && finite) c3.violating_radius = r_outer;
  c3.detail = finite ? "sup " + std::to_string(rep.sup_r3_dV) : "non-finite derivative";
  return rep;
}

ConditionVReport validate_condition_V(const PotentialSpec& spec, const std::vector<double>& grid) {
  ConditionVReport rep = inspect_condition_V(spec, grid);
  for (const ClauseResult* c : {&rep.near_zero, &rep.near_infinity, &rep.derivative})
    if (!c->pass) throw ValidationFailure(c->clause, c->violating_radius, c->detail);
  return rep;
}

RayleighReport rayleigh_scan(const PotentialSpec& spec, int trials) {
  if (trials < 1) throw std::invalid_argument("rayleigh_check needs trials >= 1");
  using boost::math::quadrature::gauss_kronrod;
  const double n = spec.N.as_double();
  const double area = unit_sphere_area(spec.N);
  RayleighReport rep;
  rep.min_normalized = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const double expo = trials == 1 ? 0.0 : -4.0 * i / (trials - 1);
    const double s = std::pow(10.0, expo);
    // support [s/e, e] in r, i.e. log r in [log s - 1, 1]
    const double mid = std::log(s) / 2.0;
    const double half = 1.0 - std::log(s) / 2.0;
    for (int shape = 0; shape < 2; ++shape) {
      // shape 0: Hardy-extremal r^{-(N-2)/2} cos(pi u/2); shape 1: plain cos^2 bump
      const double beta = shape == 0 ? (n - 2.0) / 2.0 : 0.0;
      auto eta = [shape](double u) {
        const double c = std::cos(std::numbers::pi * u / 2.0);
        return shape == 0 ? c : c * c;
      };
      auto deta = [shape](double u) {
        const double a = std::numbers::pi * u / 2.0;
        return shape == 0 ? -std::numbers::pi / 2.0 * std::sin(a)
                          : -std::numbers::pi / 2.0 * std::sin(2.0 * a);
      };
      auto grad = [&](double u) {
        const double r = std::exp(mid + half * u);
        const double t = -beta * eta(u) + deta(u) / half;
        return std::pow(r, n - 2.0 - 2.0 * beta) * t * t * half;
      };
      auto pot = [&](double u) {
        const double r = std::exp(mid + half * u);
        const double e = eta(u);
        return std::pow(r, n - 2.0 - 2.0 * beta) * r * r * spec.V(r) * e * e * half;
      };
      double err = 0.0;
      const double g = area * gauss_kronrod<double, 61>::integrate(grad, -1.0, 1.0, 15, 1e-12, &err);
      const double p = area * gauss_kronrod<double, 61>::integrate(pot, -1.0, 1.0, 15, 1e-12, &err);
      RayleighTrial t{s, beta, g + p, g};
      rep.min_normalized = std::min(rep.min_normalized, t.form / t.gradient_energy);
      rep.trials.push_back(t);
    }
  }
  rep.nonnegative = rep.min_normalized >= -1e-10;
  return rep;
}

RayleighReport rayleigh_check(const PotentialSpec& spec, int trials) {
  RayleighReport rep = rayleigh_scan(spec, trials);
  if (!rep.nonnegative)
    throw NotNonnegative("quadratic form reaches normalized value " +
                         std::to_string(rep.min_normalized));
  return rep;
}

}  // namespace hardy

#include "hardy/decay_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hardy/errors.hpp"

namespace hardy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ball_norm(const HarmonicProfile& h0, Index p, Index sigma, double R, bool derivative) {
  return lorentz_norm(profile_field(h0, R, derivative), p, sigma, Region::ball(R));
}

void require_admissible(const LorentzQuadruple& x) {
  if (!admissible(x)) {
    std::ostringstream msg;
    msg << "(p, q, sigma, theta) = (" << x.p.str() << ", " << x.q.str() << ", " << x.sigma.str() << ", "
        << x.theta.str() << ") is not admissible";
    throw NotAdmissible(msg.str());
  }
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; results are indexed, so order is fixed.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": expected a number, got '" + s + "'");
  }
}

int to_int(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != std::floor(v)) throw ConfigError("key " + key + ": expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

Index to_index(const std::string& key, const std::string& s) {
  const std::string msg = "key " + key + ": expected an index in [1, inf], got '" + s + "'";
  Index x(1.0);
  try {
    x = parse_index(s);
  } catch (const std::exception&) {
    throw ConfigError(msg);
  }
  if (!(x.value() >= 1.0)) throw ConfigError(msg);
  return x;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Evolved {
  std::vector<ModeSnapshot> snapshots;
  double initial_mass = 0.0;
  double escaped = 0.0;
};

// Snapshots of d^j/dt^j of one mode at every time.
Evolved evolve_with_derivative(std::shared_ptr<const HarmonicProfile> P, const RadialField& phi,
                               std::span<const double> times, const SolverOptions& opt, int j) {
  SolverState s(P, times.back(), opt);
  s.set_data(phi);
  Evolved out;
  for (double t : times) {
    s.advance_to(t);
    std::vector<double> u(s.w().begin(), s.w().end());
    for (int i = 0; i < j; ++i) u = s.apply_operator(u);
    ModeSnapshot m;
    m.t = t;
    m.k = P->k;
    m.N = P->N;
    m.inner_exponent = P->exponents.A1k;
    m.r = s.grid().r;
    m.v = s.times_profile(u);
    m.dv_dr = s.derivative_of(u);
    m.w = std::move(u);
    out.snapshots.push_back(std::move(m));
  }
  out.initial_mass = s.initial_mass();
  out.escaped = s.escaped_mass();
  return out;
}

double heat_radius(const ExperimentConfig& c) {
  const auto times = c.sample_times();
  const double t_final = times.empty() ? 1.0 : times.back();
  return c.solver.r_max > 0.0 ? c.solver.r_max : 40.0 * std::sqrt(std::max(t_final, 1.0));
}

}  // namespace

double theorem_rhs(const HarmonicProfile& h0, const LorentzQuadruple& x, int ell, int j, double t) {
  require_admissible(x);
  if (ell < 0 || ell > 1) throw std::invalid_argument("derivative order l must be 0 or 1");
  if (j < 0) throw std::invalid_argument("time derivative order must be >= 0");
  if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
  const double R = std::sqrt(t);
  if (R > h0.r_max()) throw std::invalid_argument("sqrt(t) beyond the profile range");
  const double n = h0.N.as_double();
  const double hs = h0.value(R);
  const double dual = ball_norm(h0, x.p.conjugate(), x.sigma.conjugate(), R, false);
  if (!std::isfinite(dual)) return kInf;
  const double target = ball_norm(h0, x.q, x.theta, R, ell == 1);
  if (!std::isfinite(target)) return kInf;
  const double tail = std::pow(t, 0.5 * n * x.q.reciprocal() - 0.5 * ell);
  return std::pow(t, -0.5 * n - j) * (dual / hs) * (target / hs + tail);
}

double corollary_rhs(const HarmonicProfile& h0, const LorentzQuadruple& x, double t) {
  require_admissible(x);
  if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
  const double R = std::sqrt(t);
  if (R > h0.r_max()) throw std::invalid_argument("sqrt(t) beyond the profile range");
  const double n = h0.N.as_double();
  const double hs = h0.value(R);
  const double dual = ball_norm(h0, x.p.conjugate(), x.sigma.conjugate(), R, false);
  const double target = ball_norm(h0, x.q, x.theta, R, false);
  if (!std::isfinite(dual) || !std::isfinite(target)) return kInf;
  return std::pow(t, -0.5 * n) * dual * target / (hs * hs);
}

double measure_norm(const ModalEvaluator& u, Index q, Index theta, int ell) {
  if (ell == 0) return q.is_infinite() ? u.sup_u() : lorentz_norm(u.field(), q, theta);
  if (ell != 1) throw std::invalid_argument("derivative order l must be 0 or 1");
  if (q.is_infinite()) return u.sup_grad();
  if (!u.radial()) throw UnsupportedMode("finite-q gradient norms need radial solutions");
  return lorentz_norm(u.radial_gradient(), q, theta);
}

PowerFit fit_decay(std::span<const double> t, std::span<const double> value, double t_lo, double t_hi) {
  std::vector<double> lt, llt, lv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo * (1.0 - 1e-12) || t[i] > t_hi * (1.0 + 1e-12)) continue;
    if (!(value[i] > 0.0) || !std::isfinite(value[i])) continue;
    lt.push_back(std::log(t[i]));
    llt.push_back(t[i] > 1.0 ? std::log(std::log(t[i])) : 0.0);
    lv.push_back(std::log(value[i]));
  }
  PowerFit fit;
  fit.points = static_cast<int>(lt.size());
  if (fit.points < 2) return fit;
  const long m = fit.points;
  auto solve = [&](int cols, Eigen::VectorXd& coef, Eigen::VectorXd& se) {
    Eigen::MatrixXd X(m, cols);
    Eigen::VectorXd y(m);
    for (long i = 0; i < m; ++i) {
      X(i, 0) = -lt[i];
      X(i, 1) = 1.0;
      if (cols == 3) X(i, 2) = llt[i];
      y(i) = lv[i];
    }
    coef = X.colPivHouseholderQr().solve(y);
    const double dof = static_cast<double>(std::max<long>(m - cols, 1));
    const double s2 = (X * coef - y).squaredNorm() / dof;
    se = (s2 * (X.transpose() * X).inverse().diagonal()).cwiseSqrt();
  };
  Eigen::VectorXd c2, s2;
  solve(2, c2, s2);
  fit.alpha = c2(0);
  fit.alpha_error = s2(0);
  const bool loglog = t_lo > 1.0 && m >= 4;
  if (loglog) {
    Eigen::VectorXd c3, s3;
    solve(3, c3, s3);
    fit.beta_error = s3(2);
    if (std::abs(c3(2)) > 3.0 * s3(2) && std::abs(c3(2)) > 1e-9) {
      fit.beta_significant = true;
      fit.beta = c3(2);
      fit.alpha = c3(0);
      fit.alpha_error = s3(0);
    }
  }
  return fit;
}

double trend_slope(std::span<const double> t, std::span<const double> value, double t_lo, double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo * (1.0 - 1e-12) || t[i] > t_hi * (1.0 + 1e-12)) continue;
    if (!(value[i] > 0.0) || !std::isfinite(value[i])) continue;
    const double x = std::log10(t[i]), y = std::log10(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const char* to_string(DataFamily f) {
  switch (f) {
    case DataFamily::Indicator: return "indicator";
    case DataFamily::Gaussian: return "gaussian";
    case DataFamily::ProfileShaped: return "h0";
  }
  return "?";
}

std::vector<double> ExperimentConfig::sample_times() const {
  if (!times.empty()) return times;
  if (!(t_min > 0.0) || !(t_max >= t_min) || per_decade < 1)
    throw ConfigError("time range needs 0 < t_min <= t_max and per_decade >= 1");
  const auto n = static_cast<int>(std::lround(per_decade * std::log10(t_max / t_min)));
  std::vector<double> out;
  for (int i = 0; i <= n; ++i)
    out.push_back(n == 0 ? t_min : t_min * std::pow(t_max / t_min, static_cast<double>(i) / n));
  out.back() = t_max;
  return out;
}

PotentialSpec make_potential(const PotentialConfig& c) {
  const Dimension N(c.N);
  if (c.family == "pure_hardy") return make_pure_hardy(c.lambda1, N);
  if (c.family == "two_scale") return make_two_scale(c.lambda1, c.lambda2, N, c.criticality);
  if (c.family == "table") {
    if (c.table.empty()) throw ConfigError("table family needs potential.table");
    return load_table_csv(c.table, N, c.criticality.value_or(Criticality::Subcritical), std::nullopt,
                          std::nullopt, c.rho1, c.rho2);
  }
  throw ConfigError("unknown potential family '" + c.family + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig c;
  const std::set<std::string> sections = {"potential", "modes", "lorentz", "times", "solver", "outputs"};
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [k, node] : body) {
      const std::string key = section + "." + k;
      const std::string v = node.data();
      if (key == "potential.family") c.potential.family = v;
      else if (key == "potential.N") c.potential.N = to_int(key, v);
      else if (key == "potential.lambda1") c.potential.lambda1 = to_double(key, v);
      else if (key == "potential.lambda2") c.potential.lambda2 = to_double(key, v);
      else if (key == "potential.criticality") {
        if (v == "subcritical") c.potential.criticality = Criticality::Subcritical;
        else if (v == "critical") c.potential.criticality = Criticality::Critical;
        else throw ConfigError("key " + key + ": expected subcritical or critical");
      } else if (key == "potential.table") c.potential.table = v;
      else if (key == "potential.rho1") c.potential.rho1 = to_double(key, v);
      else if (key == "potential.rho2") c.potential.rho2 = to_double(key, v);
      else if (key == "modes.data") {
        if (v == "indicator") c.data = DataFamily::Indicator;
        else if (v == "gaussian") c.data = DataFamily::Gaussian;
        else if (v == "h0") c.data = DataFamily::ProfileShaped;
        else throw ConfigError("key " + key + ": expected indicator, gaussian or h0");
      } else if (key == "modes.radius") c.data_radius = to_double(key, v);
      else if (key == "modes.k") {
        c.modes.clear();
        for (const auto& s : split_list(v)) c.modes.push_back(to_int(key, s));
      } else if (key == "modes.amplitudes") {
        c.amplitudes.clear();
        for (const auto& s : split_list(v)) c.amplitudes.push_back(to_double(key, s));
      } else if (key == "modes.sources") {
        c.sources.clear();
        for (const auto& s : split_list(v)) c.sources.push_back(to_double(key, s));
      } else if (key == "lorentz.p") c.quadruple.p = to_index(key, v);
      else if (key == "lorentz.q") c.quadruple.q = to_index(key, v);
      else if (key == "lorentz.sigma") c.quadruple.sigma = to_index(key, v);
      else if (key == "lorentz.theta") c.quadruple.theta = to_index(key, v);
      else if (key == "lorentz.ell") c.ell = to_int(key, v);
      else if (key == "lorentz.j") c.j = to_int(key, v);
      else if (key == "times.t_min") c.t_min = to_double(key, v);
      else if (key == "times.t_max") c.t_max = to_double(key, v);
      else if (key == "times.per_decade") c.per_decade = to_int(key, v);
      else if (key == "times.list") {
        c.times.clear();
        for (const auto& s : split_list(v)) c.times.push_back(to_double(key, s));
      } else if (key == "times.fit_min") c.fit_min = to_double(key, v);
      else if (key == "times.fit_max") c.fit_max = to_double(key, v);
      else if (key == "solver.grid_scale") c.solver.grid_scale = to_double(key, v);
      else if (key == "solver.tol") c.solver.tol = to_double(key, v);
      else if (key == "solver.per_decade") c.solver.per_decade = to_int(key, v);
      else if (key == "solver.core") c.solver.core = to_double(key, v);
      else if (key == "solver.r_max") c.solver.r_max = to_double(key, v);
      else if (key == "solver.dt_max") c.solver.dt_max = to_double(key, v);
      else if (key == "solver.boundary") {
        if (v == "absorbing") c.solver.boundary = Boundary::Absorbing;
        else if (v == "reflecting") c.solver.boundary = Boundary::Reflecting;
        else throw ConfigError("key " + key + ": expected absorbing or reflecting");
      } else if (key == "solver.profile_per_decade") c.profile.per_decade = to_int(key, v);
      else if (key == "solver.profile_tol") c.profile.tol = to_double(key, v);
      else if (key == "solver.threads") c.threads = to_int(key, v);
      else if (key == "outputs.dir") c.out_dir = v;
      else if (key == "outputs.prefix") c.prefix = v;
      else throw ConfigError("unknown key " + key);
    }
  }
  if (c.amplitudes.size() == 1 && c.modes.size() > 1) c.amplitudes.assign(c.modes.size(), c.amplitudes[0]);
  if (c.amplitudes.size() != c.modes.size()) throw ConfigError("modes.k and modes.amplitudes differ in length");
  if (c.ell < 0 || c.ell > 1) throw ConfigError("lorentz.ell must be 0 or 1");
  if (c.j < 0) throw ConfigError("lorentz.j must be >= 0");
  if (!admissible(c.quadruple)) throw NotAdmissible("configured (p, q, sigma, theta) is not admissible");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::map<std::string, std::string> describe(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  m["potential.family"] = c.potential.family;
  m["potential.N"] = std::to_string(c.potential.N);
  m["potential.lambda1"] = fmt(c.potential.lambda1);
  m["potential.lambda2"] = fmt(c.potential.lambda2);
  m["potential.criticality"] = c.potential.criticality ? to_string(*c.potential.criticality) : "default";
  m["potential.table"] = c.potential.table;
  m["modes.data"] = to_string(c.data);
  m["modes.radius"] = fmt(c.data_radius);
  std::vector<double> ks(c.modes.begin(), c.modes.end());
  m["modes.k"] = join(ks);
  m["modes.amplitudes"] = join(c.amplitudes);
  m["modes.sources"] = join(c.sources);
  m["lorentz.p"] = c.quadruple.p.str();
  m["lorentz.q"] = c.quadruple.q.str();
  m["lorentz.sigma"] = c.quadruple.sigma.str();
  m["lorentz.theta"] = c.quadruple.theta.str();
  m["lorentz.ell"] = std::to_string(c.ell);
  m["lorentz.j"] = std::to_string(c.j);
  m["times.list"] = join(c.sample_times());
  m["times.fit_min"] = fmt(c.fit_min);
  m["times.fit_max"] = fmt(c.fit_max);
  m["solver.grid_scale"] = fmt(c.solver.grid_scale);
  m["solver.tol"] = fmt(c.solver.tol);
  m["solver.per_decade"] = std::to_string(c.solver.per_decade);
  m["solver.core"] = fmt(c.solver.core);
  m["solver.r_max"] = fmt(heat_radius(c));
  m["solver.boundary"] = to_string(c.solver.boundary);
  m["solver.profile_per_decade"] = std::to_string(c.profile.per_decade);
  m["solver.profile_tol"] = fmt(c.profile.tol);
  m["solver.threads"] = std::to_string(c.threads);
  m["outputs.dir"] = c.out_dir;
  m["outputs.prefix"] = c.prefix;
  return m;
}

std::shared_ptr<const HarmonicProfile> heat_profile(const PotentialSpec& spec, int k, const ExperimentConfig& c) {
  ProfileOptions o = c.profile;
  o.r_max = std::max(o.r_max, 2.0 * heat_radius(c));
  return std::make_shared<HarmonicProfile>(solve_profile(spec, k, o));
}

RadialField initial_mode(const ExperimentConfig& c, const HarmonicProfile& h0, int k, double amplitude) {
  const Dimension N = h0.N;
  if (k < 0 || k > 1) throw UnsupportedMode("initial data is assembled for k = 0 and k = 1 only");
  if (k == 1 && N.value() != 3) throw UnsupportedMode("k = 1 data needs N = 3");
  const double R = c.data_radius;
  const double scale = amplitude / harmonic_factor(k, N);
  const double lo = 1e-4 * R;
  switch (c.data) {
    case DataFamily::Indicator:
      return RadialField::sample([&](double r) { return scale * std::pow(r, k); }, lo, R, 400, N, k);
    case DataFamily::Gaussian:
      return RadialField::sample([&](double r) { return scale * std::pow(r, k) * std::exp(-r * r / (R * R)); },
                                 lo, 12.0 * R, 400, N, k);
    case DataFamily::ProfileShaped:
      return RadialField::sample([&](double r) { return scale * std::pow(r, k) * h0.value(r); }, lo, R, 400, N,
                                 k + h0.exponents.A1k);
  }
  throw UnsupportedMode("unknown data family");
}

DecayReport run_decay_experiment(const ExperimentConfig& c) {
  require_admissible(c.quadruple);
  const PotentialSpec spec = make_potential(c.potential);
  if (!check_Nprime(spec)) throw ConfigError("condition (N') fails for the configured potential");
  const std::vector<double> times = c.sample_times();
  if (times.empty() || !(times.front() > 0.0)) throw ConfigError("sample times must be positive");

  std::vector<std::shared_ptr<const HarmonicProfile>> profiles(c.modes.size());
  parallel_for(c.modes.size(), c.threads, [&](std::size_t i) { profiles[i] = heat_profile(spec, c.modes[i], c); });
  std::shared_ptr<const HarmonicProfile> h0;
  for (std::size_t i = 0; i < c.modes.size(); ++i)
    if (c.modes[i] == 0) h0 = profiles[i];
  if (!h0) h0 = heat_profile(spec, 0, c);

  std::vector<RadialField> data;
  std::vector<ModalComponent> comps;
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    data.push_back(initial_mode(c, *h0, c.modes[i], c.amplitudes[i]));
    comps.push_back({c.modes[i], 1, data.back()});
  }
  DecayReport rep;
  rep.input_norm = lorentz_norm(ModalField(Dimension(c.potential.N), comps), c.quadruple.p, c.quadruple.sigma);
  if (!(rep.input_norm > 0.0) || !std::isfinite(rep.input_norm))
    throw ConfigError("initial data has no finite nonzero L^{p,sigma} norm");

  std::vector<Evolved> evolved(c.modes.size());
  parallel_for(c.modes.size(), c.threads, [&](std::size_t i) {
    evolved[i] = evolve_with_derivative(profiles[i], data[i], times, c.solver, c.j);
  });
  double mass = 0.0, escaped = 0.0;
  for (const auto& e : evolved) {
    mass += std::abs(e.initial_mass);
    escaped += std::abs(e.escaped);
  }
  rep.escaped_fraction = mass > 0.0 ? escaped / mass : 0.0;
  if (rep.escaped_fraction > c.solver.escape_limit) rep.notes.push_back("absorbing boundary removed more than the escape limit");

  rep.rows.resize(times.size());
  parallel_for(times.size(), c.threads, [&](std::size_t ti) {
    std::vector<ModalSnapshot> modes;
    for (std::size_t i = 0; i < c.modes.size(); ++i) modes.push_back({c.modes[i], 1, evolved[i].snapshots[ti]});
    const ModalEvaluator u(Dimension(c.potential.N), std::move(modes));
    DecayRow& row = rep.rows[ti];
    row.t = times[ti];
    row.measured = measure_norm(u, c.quadruple.q, c.quadruple.theta, c.ell) / rep.input_norm;
    row.thm_rhs = theorem_rhs(*h0, c.quadruple, c.ell, c.j, row.t);
    row.cor_rhs = c.ell == 0 && c.j == 0 ? corollary_rhs(*h0, c.quadruple, row.t) : kInf;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.ratio_thm = std::isfinite(row.thm_rhs) ? row.measured / row.thm_rhs : nan;
    row.ratio_cor = std::isfinite(row.cor_rhs) ? row.measured / row.cor_rhs : nan;
  });

  std::vector<double> t, meas, thm, cor, rthm, rcor;
  for (const auto& r : rep.rows) {
    t.push_back(r.t);
    meas.push_back(r.measured);
    thm.push_back(r.thm_rhs);
    cor.push_back(r.cor_rhs);
    rthm.push_back(r.ratio_thm);
    rcor.push_back(r.ratio_cor);
  }
  rep.measured_fit = fit_decay(t, meas, c.fit_min, c.fit_max);
  rep.thm_fit = fit_decay(t, thm, c.fit_min, c.fit_max);
  rep.cor_fit = fit_decay(t, cor, c.fit_min, c.fit_max);
  if (std::count_if(t.begin(), t.end(), [](double x) { return x < 1.0; }) >= 3)
    rep.measured_small_t = fit_decay(t, meas, 0.0, 1.0 - 1e-12);
  auto finite_max = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
      if (std::isfinite(x)) m = std::max(m, x);
    return m;
  };
  rep.max_ratio_thm = finite_max(rthm);
  rep.max_ratio_cor = finite_max(rcor);
  const double t_end = t.back();
  rep.trend_thm = trend_slope(t, rthm, t_end / 100.0, t_end);
  rep.trend_cor = trend_slope(t, rcor, t_end / 100.0, t_end);
  auto pass = [](double max_ratio, double trend) {
    return max_ratio > 0.0 && std::isfinite(max_ratio) && std::isfinite(trend) && trend <= 0.05;
  };
  rep.pass_thm = pass(rep.max_ratio_thm, rep.trend_thm);
  rep.pass_cor = pass(rep.max_ratio_cor, rep.trend_cor);
  return rep;
}

GaussianBoundReport gaussian_bound_report(const ExperimentConfig& c) {
  const PotentialSpec spec = make_potential(c.potential);
  const std::vector<double> times = c.sample_times();
  ExperimentConfig fine = c;
  fine.solver.grid_scale *= 2.0;
  const auto h0 = heat_profile(spec, 0, c);
  GaussianBoundReport rep;
  rep.rows.resize(c.sources.size());
  rep.estimates.resize(c.sources.size());
  parallel_for(c.sources.size(), c.threads, [&](std::size_t i) {
    KernelOptions coarse_opt, fine_opt;
    coarse_opt.solver = c.solver;
    fine_opt.solver = fine.solver;
    const KernelEstimate a = estimate_kernel(h0, c.sources[i], times, coarse_opt);
    KernelEstimate b = estimate_kernel(h0, c.sources[i], times, fine_opt);
    GaussianBoundRow& row = rep.rows[i];
    row.y = c.sources[i];
    row.C = a.C;
    row.C_refined = b.C;
    row.drift = std::abs(b.C / a.C - 1.0);
    row.min_p = std::min(a.min_p, b.min_p);
    rep.estimates[i] = std::move(b);
  });
  rep.pass = !rep.rows.empty();
  for (const auto& r : rep.rows) {
    rep.C = std::max(rep.C, r.C_refined);
    rep.pass = rep.pass && std::isfinite(r.C_refined) && r.drift <= 0.05;
  }
  return rep;
}

}  // namespace hardy

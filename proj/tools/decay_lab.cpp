#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hardy/decay_lab.hpp"
#include "hardy/errors.hpp"
#include "hardy/harmonic_profile.hpp"
#include "hardy/lorentz.hpp"
#include "hardy/potential.hpp"
#include "hardy/radial_heat.hpp"

#ifndef HARDY_VERSION
#define HARDY_VERSION "dev"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hardy;

namespace {

struct Globals {
  std::string config;
  std::string out;
  double grid_scale = 0.0;
  double tol = 0.0;
  int threads = 0;
};

ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (!g.out.empty()) c.out_dir = g.out;
  if (g.grid_scale > 0.0) c.solver.grid_scale = g.grid_scale;
  if (g.tol > 0.0) c.solver.tol = g.tol;
  if (g.threads > 0) c.threads = g.threads;
  fs::create_directories(c.out_dir);
  return c;
}

fs::path output(const ExperimentConfig& c, const std::string& name) {
  return fs::path(c.out_dir) / (c.prefix + "_" + name);
}

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << std::setprecision(12) << header << '\n';
  return f;
}

// JSON has no infinities or NaN; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json fit_json(const PowerFit& f) {
  return {{"alpha", number(f.alpha)},         {"alpha_error", number(f.alpha_error)},
          {"beta", number(f.beta)},           {"beta_error", number(f.beta_error)},
          {"beta_significant", f.beta_significant}, {"points", f.points}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

// Every resolved parameter plus tool and compiler versions.
void write_manifest(const ExperimentConfig& c, const std::string& command, const json& extra,
                    const std::vector<fs::path>& files) {
  json m;
  m["command"] = command;
  m["tool"] = {{"name", "decay_lab"}, {"version", HARDY_VERSION}, {"compiler", __VERSION__},
               {"cxx_standard", static_cast<long>(__cplusplus)}};
  m["parameters"] = describe(c);
  m["outputs"] = json::array();
  for (const auto& f : files) m["outputs"].push_back(f.string());
  m["results"] = extra;
  write_json(output(c, command + "_manifest.json"), m);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double number_arg(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("expected a number, got '" + s + "'");
}

Region parse_region(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.empty() || parts[0] == "whole") return Region::whole();
  if (parts[0] == "ball" && parts.size() == 2) return Region::ball(number_arg(parts[1]));
  if (parts[0] == "exterior" && parts.size() == 2) return Region::exterior(number_arg(parts[1]));
  if (parts[0] == "annulus" && parts.size() == 3)
    return Region::annulus(number_arg(parts[1]), number_arg(parts[2]));
  throw ConfigError("region must be whole, ball:R, exterior:R or annulus:a:b");
}

RadialField read_field_csv(const std::string& path, Dimension N) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field table " + path);
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    const auto cols = split(line, ',');
    if (cols.size() < 2) continue;
    try {
      r.push_back(std::stod(cols[0]));
      v.push_back(std::stod(cols[1]));
    } catch (const std::exception&) {
      if (!r.empty()) throw ConfigError("non-numeric row in " + path);
    }
  }
  return RadialField(std::move(r), std::move(v), N);
}

// power:A:R, indicator:R, gaussian:s, h0:R (profile of the configured potential), csv:path
RadialField parse_field(const std::string& s, const ExperimentConfig& c) {
  const Dimension N(c.potential.N);
  const auto parts = split(s, ':');
  const std::string kind = parts.empty() ? "" : parts[0];
  if (kind == "power" && parts.size() == 3)
    return RadialField::power_law(number_arg(parts[1]), number_arg(parts[2]), N);
  if (kind == "indicator" && parts.size() == 2) return RadialField::indicator(number_arg(parts[1]), N);
  if (kind == "gaussian" && parts.size() == 2) {
    const double w = number_arg(parts[1]);
    return RadialField::sample([w](double r) { return std::exp(-r * r / (w * w)); }, 1e-4 * w, 12.0 * w, 400, N);
  }
  if (kind == "h0" && parts.size() == 2) {
    const double R = number_arg(parts[1]);
    ProfileOptions o = c.profile;
    o.r_max = std::max(o.r_max, 2.0 * R);
    return profile_field(solve_profile(make_potential(c.potential), 0, o), R);
  }
  if (kind == "csv" && parts.size() >= 2) return read_field_csv(s.substr(4), N);
  throw ConfigError("field must be power:A:R, indicator:R, gaussian:s, h0:R or csv:path");
}

json clause_json(const ClauseResult& r) {
  return {{"clause", r.clause},
          {"pass", r.pass},
          {"fitted_constant", number(r.fitted_constant)},
          {"fitted_rate", number(r.fitted_rate)},
          {"max_ratio", number(r.max_ratio)},
          {"violating_radius", number(r.violating_radius)},
          {"detail", r.detail}};
}

int cmd_validate(const ExperimentConfig& c, int trials) {
  const PotentialSpec spec = make_potential(c.potential);
  const ConditionVReport v = inspect_condition_V(spec, condition_V_grid());
  const bool nprime = check_Nprime(spec);
  const RayleighReport ray = rayleigh_scan(spec, trials);
  const bool ok = v.pass() && nprime && ray.nonnegative;
  std::cout << "condition (V) near 0:   " << (v.near_zero.pass ? "pass" : "FAIL") << "  " << v.near_zero.detail << '\n'
            << "condition (V) near inf: " << (v.near_infinity.pass ? "pass" : "FAIL") << "  "
            << v.near_infinity.detail << '\n'
            << "condition (V) r^3 V':   " << (v.derivative.pass ? "pass" : "FAIL") << "  sup " << v.sup_r3_dV << '\n'
            << "condition (N'):         " << (nprime ? "pass" : "FAIL") << '\n'
            << "nonnegativity scan:     " << (ray.nonnegative ? "pass" : "FAIL") << "  min form/energy "
            << ray.min_normalized << '\n';
  json res = {{"near_zero", clause_json(v.near_zero)},
              {"near_infinity", clause_json(v.near_infinity)},
              {"derivative", clause_json(v.derivative)},
              {"sup_r3_dV", number(v.sup_r3_dV)},
              {"nprime", nprime},
              {"rayleigh_min_normalized", number(ray.min_normalized)},
              {"rayleigh_nonnegative", ray.nonnegative},
              {"pass", ok}};
  const auto path = output(c, "validate.json");
  write_json(path, res);
  write_manifest(c, "validate", res, {path});
  return ok ? 0 : 1;
}

int cmd_profile(const ExperimentConfig& c, std::vector<int> ks) {
  const PotentialSpec spec = make_potential(c.potential);
  if (ks.empty()) ks = c.modes;
  json summary = json::array();
  std::vector<fs::path> files;
  for (int k : ks) {
    const HarmonicProfile P = solve_profile(spec, k, c.profile);
    const ComparisonProfile vplus(ComparisonProfile::Branch::Plus, k, spec.lambda1, spec.N);
    const auto path = output(c, "profile_k" + std::to_string(k) + ".csv");
    auto f = open_csv(path, "r,h_k,dh_k,v_plus,v_k,ratio");
    for (std::size_t i = 0; i < P.grid.size(); ++i) {
      const double r = P.grid.r[i], vk = P.far_shape(r);
      f << r << ',' << P.h[i] << ',' << P.dh[i] << ',' << vplus(r) << ',' << vk << ',' << P.h[i] / vk << '\n';
    }
    files.push_back(path);
    const AsymptoticReport a = compare_asymptotics(P);
    json entry = {{"k", k},
                  {"A1k", number(P.exponents.A1k)},
                  {"A2k", number(P.exponents.A2k)},
                  {"Bk", P.exponents.Bk},
                  {"picard_radius", number(P.picard_radius)},
                  {"picard_ratio", number(P.picard_ratio)},
                  {"picard_iterations", P.picard_iterations},
                  {"matching_mismatch", number(P.matching_mismatch)},
                  {"ode_steps", P.ode_steps},
                  {"ode_residual", number(ode_residual(P, spec))},
                  {"near_ratio", {number(a.near_min), number(a.near_max)}},
                  {"far_ratio", {number(a.far_min), number(a.far_max)}},
                  {"near_rate_constant", number(a.near_rate_constant)},
                  {"asymptotics_pass", a.pass},
                  {"failures", a.failures}};
    try {
      const CkFit fit = fit_ck(P);
      entry["c_k"] = number(fit.c_k);
      entry["c_k_residual"] = number(fit.residual);
    } catch (const AsymptoticNotReached& e) {
      entry["c_k"] = "not reached";
    }
    summary.push_back(entry);
    std::cout << "k=" << k << "  R0=" << P.picard_radius << "  contraction=" << P.picard_ratio
              << "  far ratio in [" << a.far_min << ", " << a.far_max << "]  -> " << path.string() << '\n';
  }
  const auto js = output(c, "profile_summary.json");
  write_json(js, summary);
  files.push_back(js);
  write_manifest(c, "profile", summary, files);
  return 0;
}

int cmd_norm(const ExperimentConfig& c, const std::string& field_spec, const std::string& p_text,
             const std::string& sigma_text, const std::string& region_text, bool rearrangement) {
  const RadialField f = parse_field(field_spec, c);
  const Index p = parse_index(p_text), sigma = parse_index(sigma_text);
  const Region region = parse_region(region_text);
  const double value = lorentz_norm(f, p, sigma, region);
  std::cout << "||f||_{L^{" << p.str() << "," << sigma.str() << "}} = " << std::setprecision(12) << value << '\n';
  json res = {{"field", field_spec}, {"p", p.str()}, {"sigma", sigma.str()}, {"region", region_text},
              {"norm", number(value)}};
  std::vector<fs::path> files;
  if (rearrangement) {
    const Rearrangement fs_ = decreasing_rearrangement(f, region);
    const auto path = output(c, "rearrangement.csv");
    auto out = open_csv(path, "s,f_star");
    for (const auto& [s, v] : fs_.samples(50)) out << s << ',' << v << '\n';
    files.push_back(path);
  }
  write_manifest(c, "norm", res, files);
  return 0;
}

int cmd_evolve(const ExperimentConfig& c) {
  const PotentialSpec spec = make_potential(c.potential);
  const std::vector<double> times = c.sample_times();
  const auto h0 = heat_profile(spec, 0, c);
  json modes = json::array();
  std::vector<fs::path> files;
  for (std::size_t m = 0; m < c.modes.size(); ++m) {
    const int k = c.modes[m];
    const auto P = k == 0 ? h0 : heat_profile(spec, k, c);
    const RadialField phi = initial_mode(c, *h0, k, c.amplitudes[m]);
    SolverOptions opt = c.solver;
    const ModeEvolution ev = evolve_mode(P, phi, times, opt);
    for (std::size_t i = 0; i < ev.snapshots.size(); ++i) {
      const ModeSnapshot& s = ev.snapshots[i];
      std::ostringstream name;
      name << "evolve_k" << k << "_t" << std::setw(3) << std::setfill('0') << i << ".csv";
      const auto path = output(c, name.str());
      auto f = open_csv(path, "r,v,w,dv_dr");
      for (std::size_t j = 0; j < s.r.size(); ++j)
        f << s.r[j] << ',' << s.v[j] << ',' << s.w[j] << ',' << s.dv_dr[j] << '\n';
      files.push_back(path);
    }
    json dt = json::array(), ledger = json::array();
    for (const auto& h : ev.history) {
      dt.push_back({number(h.t), number(h.dt), number(h.error)});
      ledger.push_back({number(h.t), number(h.mass), number(h.escaped), number(h.l2)});
    }
    const auto& s0 = ev.snapshots.front();
    modes.push_back({{"k", k},
                     {"times", times},
                     {"grid", {{"nodes", s0.r.size()}, {"r_min", s0.r.front()}, {"r_max", s0.r.back()}}},
                     {"steps", ev.history.size()},
                     {"dt_history", {{"columns", {"t", "dt", "error"}}, {"rows", dt}}},
                     {"mass_ledger", {{"columns", {"t", "mass", "escaped", "l2"}}, {"rows", ledger}}},
                     {"initial_mass", number(ev.initial_mass)},
                     {"escaped_mass", number(ev.escaped_mass)},
                     {"escape_flagged", ev.escape_flagged}});
    std::cout << "k=" << k << "  steps=" << ev.history.size() << "  escaped=" << ev.escaped_mass
              << (ev.escape_flagged ? "  (escape limit exceeded)" : "") << '\n';
  }
  write_manifest(c, "evolve", {{"modes", modes}}, files);
  return 0;
}

int cmd_kernel(const ExperimentConfig& c) {
  const GaussianBoundReport rep = gaussian_bound_report(c);
  std::vector<fs::path> files;
  json rows = json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    const auto path = output(c, "kernel_y" + std::to_string(i) + ".csv");
    auto f = open_csv(path, "t,x,p,bound,ratio");
    for (const auto& s : rep.estimates[i].samples)
      f << s.t << ',' << s.x << ',' << s.p << ',' << s.bound << ',' << s.ratio << '\n';
    files.push_back(path);
    rows.push_back({{"y", r.y}, {"C", number(r.C)}, {"C_refined", number(r.C_refined)},
                    {"drift", number(r.drift)}, {"min_p", number(r.min_p)}});
    std::cout << "y=" << r.y << "  C=" << r.C << "  refined C=" << r.C_refined << "  drift=" << r.drift
              << "  min p/max p=" << r.min_p << '\n';
  }
  std::cout << "envelope constant " << rep.C << (rep.pass ? "  PASS" : "  FAIL") << '\n';
  write_manifest(c, "kernel", {{"sources", rows}, {"C", number(rep.C)}, {"pass", rep.pass}}, files);
  return rep.pass ? 0 : 1;
}

void write_gnuplot(const fs::path& script, const fs::path& csv, const fs::path& png) {
  std::ofstream g(script);
  g << "set datafile separator ','\n"
    << "set terminal pngcairo size 900,600\n"
    << "set output '" << png.filename().string() << "'\n"
    << "set logscale xy\n"
    << "set xlabel 't'\n"
    << "set key top right\n"
    << "plot '" << csv.filename().string() << "' using 1:2 skip 1 with linespoints title 'measured', \\\n"
    << "     '' using 1:3 skip 1 with lines title 'theorem rhs', \\\n"
    << "     '' using 1:4 skip 1 with lines title 'corollary rhs'\n";
}

int cmd_decay(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const DecayReport rep = run_decay_experiment(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto csv = output(c, "decay.csv");
  {
    auto f = open_csv(csv, "t,measured,thm_rhs,cor_rhs,ratio_thm,ratio_cor");
    for (const auto& r : rep.rows)
      f << r.t << ',' << r.measured << ',' << r.thm_rhs << ',' << r.cor_rhs << ',' << r.ratio_thm << ','
        << r.ratio_cor << '\n';
  }
  const auto gp = output(c, "decay.gp");
  write_gnuplot(gp, csv, output(c, "decay.png"));
  json res = {{"measured_fit", fit_json(rep.measured_fit)},
              {"thm_fit", fit_json(rep.thm_fit)},
              {"cor_fit", fit_json(rep.cor_fit)},
              {"max_ratio_thm", number(rep.max_ratio_thm)},
              {"max_ratio_cor", number(rep.max_ratio_cor)},
              {"trend_thm", number(rep.trend_thm)},
              {"trend_cor", number(rep.trend_cor)},
              {"pass_thm", rep.pass_thm},
              {"pass_cor", rep.pass_cor},
              {"input_norm", number(rep.input_norm)},
              {"escaped_fraction", number(rep.escaped_fraction)},
              {"notes", rep.notes},
              {"seconds", seconds}};
  if (rep.measured_small_t) res["measured_small_t_fit"] = fit_json(*rep.measured_small_t);
  std::cout << "measured alpha " << rep.measured_fit.alpha << " +- " << rep.measured_fit.alpha_error;
  if (rep.measured_fit.beta_significant) std::cout << "  beta " << rep.measured_fit.beta;
  std::cout << "\ntheorem rhs alpha " << rep.thm_fit.alpha << "  ratio max " << rep.max_ratio_thm << " trend "
            << rep.trend_thm << (rep.pass_thm ? "  PASS" : "  FAIL") << '\n'
            << "corollary rhs alpha " << rep.cor_fit.alpha << "  ratio max " << rep.max_ratio_cor << " trend "
            << rep.trend_cor << (rep.pass_cor ? "  PASS" : "  FAIL") << '\n'
            << "-> " << csv.string() << '\n';
  for (const auto& n : rep.notes) std::cout << "note: " << n << '\n';
  write_manifest(c, "decay", res, {csv, gp});
  return rep.pass_thm ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay experiments for Schroedinger heat semigroups with inverse-square potentials"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", HARDY_VERSION);
  Globals g;
  app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--grid-scale", g.grid_scale, "Multiplier of the heat grid density")->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "Local time-step error target")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  int trials = 64;
  auto* validate = app.add_subcommand("validate", "Check conditions (V), (N') and nonnegativity of the potential");
  validate->add_option("--trials", trials, "Rayleigh trial functions");

  std::vector<int> ks;
  auto* profile = app.add_subcommand("profile", "Build harmonic profiles h_k and write them as CSV");
  profile->add_option("-k,--k", ks, "Modes (default: modes.k of the config)");

  std::string field, p_text = "2", sigma_text = "2", region = "whole";
  bool rearr = false;
  auto* norm = app.add_subcommand("norm", "Lorentz norm of a radial field");
  norm->add_option("--field", field, "power:A:R, indicator:R, gaussian:s, h0:R or csv:path")->required();
  norm->add_option("--p", p_text, "Primary index (number or inf)");
  norm->add_option("--sigma", sigma_text, "Secondary index (number or inf)");
  norm->add_option("--region", region, "whole, ball:R, exterior:R or annulus:a:b");
  norm->add_flag("--rearrangement", rearr, "Also write the decreasing rearrangement as CSV");

  auto* evolve = app.add_subcommand("evolve", "Evolve the configured modes and write snapshots");
  auto* kernel = app.add_subcommand("kernel", "Fit the Gaussian envelope constant of the mode-0 kernel");
  auto* decay = app.add_subcommand("decay", "Measure decay against the theorem and corollary bounds");

  CLI11_PARSE(app, argc, argv);
  try {
    const ExperimentConfig c = resolve(g);
    if (*validate) return cmd_validate(c, trials);
    if (*profile) return cmd_profile(c, ks);
    if (*norm) return cmd_norm(c, field, p_text, sigma_text, region, rearr);
    if (*evolve) return cmd_evolve(c);
    if (*kernel) return cmd_kernel(c);
    if (*decay) return cmd_decay(c);
  } catch (const hardy::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

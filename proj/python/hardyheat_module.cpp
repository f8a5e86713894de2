#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "hardy/decay_lab.hpp"
#include "hardy/errors.hpp"
#include "hardy/harmonic_profile.hpp"
#include "hardy/lorentz.hpp"
#include "hardy/potential.hpp"
#include "hardy/radial_heat.hpp"

namespace py = pybind11;
using namespace hardy;

namespace {

PotentialSpec potential(const std::string& family, double lambda1, double lambda2, int N) {
  if (family == "pure_hardy") return make_pure_hardy(lambda1, Dimension(N));
  if (family == "two_scale") return make_two_scale(lambda1, lambda2, Dimension(N));
  throw ConfigError("unknown potential family '" + family + "'");
}

py::dict decay_to_dict(const DecayReport& rep) {
  std::vector<double> t, measured, thm, cor, rt, rc;
  for (const auto& r : rep.rows) {
    t.push_back(r.t);
    measured.push_back(r.measured);
    thm.push_back(r.thm_rhs);
    cor.push_back(r.cor_rhs);
    rt.push_back(r.ratio_thm);
    rc.push_back(r.ratio_cor);
  }
  py::dict d;
  d["t"] = t;
  d["measured"] = measured;
  d["thm_rhs"] = thm;
  d["cor_rhs"] = cor;
  d["ratio_thm"] = rt;
  d["ratio_cor"] = rc;
  d["alpha"] = rep.measured_fit.alpha;
  d["beta"] = rep.measured_fit.beta;
  d["max_ratio_thm"] = rep.max_ratio_thm;
  d["max_ratio_cor"] = rep.max_ratio_cor;
  d["trend_thm"] = rep.trend_thm;
  d["trend_cor"] = rep.trend_cor;
  d["pass_thm"] = rep.pass_thm;
  d["pass_cor"] = rep.pass_cor;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hardyheat, m) {
  m.doc() = "Heat semigroups with inverse-square potentials: profiles, Lorentz norms, decay";

  py::register_exception<Error>(m, "HardyError", PyExc_ValueError);

  m.def("omega", [](int k, int N) { return omega(k, Dimension(N)); }, py::arg("k"), py::arg("N"));
  m.def("multiplicity", [](int k, int N) { return multiplicity(k, Dimension(N)); }, py::arg("k"), py::arg("N"));
  m.def(
      "exponents",
      [](double lambda, int N) {
        const Exponents e = exponents(lambda, Dimension(N));
        return py::make_tuple(e.minus, e.plus);
      },
      py::arg("lambda_"), py::arg("N"), "(A-, A+) with A(A + N - 2) = lambda");
  m.def(
      "admissible", [](double p, double q, double s, double t) { return admissible(p, q, s, t); }, py::arg("p"),
      py::arg("q"), py::arg("sigma"), py::arg("theta"));

  py::class_<PotentialSpec>(m, "Potential")
      .def(py::init(&potential), py::arg("family") = "pure_hardy", py::arg("lambda1") = 0.0,
           py::arg("lambda2") = 0.0, py::arg("N") = 3)
      .def("__call__", [](const PotentialSpec& s, double r) { return s.V(r); })
      .def_readonly("lambda1", &PotentialSpec::lambda1)
      .def_readonly("lambda2", &PotentialSpec::lambda2)
      .def_readonly("family", &PotentialSpec::family);

  py::class_<HarmonicProfile, std::shared_ptr<HarmonicProfile>>(m, "Profile")
      .def("__call__", &HarmonicProfile::value)
      .def("derivative", &HarmonicProfile::derivative)
      .def_readonly("k", &HarmonicProfile::k)
      .def_readonly("picard_ratio", &HarmonicProfile::picard_ratio)
      .def_readonly("picard_radius", &HarmonicProfile::picard_radius)
      .def_property_readonly("A1", [](const HarmonicProfile& p) { return p.exponents.A1k; })
      .def_property_readonly("A2", [](const HarmonicProfile& p) { return p.exponents.A2k; })
      .def_property_readonly("r", [](const HarmonicProfile& p) { return p.grid.r; })
      .def_property_readonly("h", [](const HarmonicProfile& p) { return p.h; })
      .def("c_k", [](const HarmonicProfile& p) { return fit_ck(p).c_k; });

  m.def(
      "solve_profile",
      [](const PotentialSpec& s, int k, double r_max) {
        ProfileOptions o;
        o.r_max = r_max;
        return std::make_shared<HarmonicProfile>(solve_profile(s, k, o));
      },
      py::arg("potential"), py::arg("k") = 0, py::arg("r_max") = 1e3);

  m.def(
      "lorentz_norm",
      [](std::vector<double> r, std::vector<double> v, int N, double p, double sigma, double inner,
         std::optional<double> outer) {
        return lorentz_norm(RadialField(std::move(r), std::move(v), Dimension(N), inner, outer), p, sigma);
      },
      py::arg("r"), py::arg("values"), py::arg("N"), py::arg("p"), py::arg("sigma"), py::arg("inner_exponent") = 0.0,
      py::arg("outer_exponent") = py::none(), "Lorentz norm of a sampled radial field");
  m.def(
      "power_law_norm",
      [](double A, double R, int N, double p, double sigma) {
        return lorentz_norm(RadialField::power_law(A, R, Dimension(N)), p, sigma);
      },
      py::arg("A"), py::arg("R"), py::arg("N"), py::arg("p"), py::arg("sigma"));

  m.def(
      "evolve",
      [](const std::shared_ptr<HarmonicProfile>& P, std::vector<double> r, std::vector<double> v,
         std::vector<double> times) {
        const RadialField phi(std::move(r), std::move(v), P->N, P->exponents.A1k);
        py::list out;
        for (const auto& s : evolve_mode(P, phi, times).snapshots) {
          py::dict d;
          d["t"] = s.t;
          d["r"] = s.r;
          d["v"] = s.v;
          d["w"] = s.w;
          d["dv_dr"] = s.dv_dr;
          out.append(d);
        }
        return out;
      },
      py::arg("profile"), py::arg("r"), py::arg("values"), py::arg("times"));

  m.def(
      "theorem_rhs",
      [](const HarmonicProfile& h, double p, double q, double s, double th, int ell, int j, double t) {
        return theorem_rhs(h, {p, q, s, th}, ell, j, t);
      },
      py::arg("h0"), py::arg("p"), py::arg("q"), py::arg("sigma"), py::arg("theta"), py::arg("ell"), py::arg("j"),
      py::arg("t"));
  m.def(
      "corollary_rhs",
      [](const HarmonicProfile& h, double p, double q, double s, double th, double t) {
        return corollary_rhs(h, {p, q, s, th}, t);
      },
      py::arg("h0"), py::arg("p"), py::arg("q"), py::arg("sigma"), py::arg("theta"), py::arg("t"));

  m.def(
      "run_decay", [](const std::string& ini) { return decay_to_dict(run_decay_experiment(parse_config(ini))); },
      py::arg("config_text"), "Runs the decay experiment described by INI text");
}

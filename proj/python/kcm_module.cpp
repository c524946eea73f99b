#include "kcm/analysis.hpp"
#include "kcm/boxes.hpp"
#include "kcm/cluster_path.hpp"
#include "kcm/configuration.hpp"
#include "kcm/errors.hpp"
#include "kcm/kmc.hpp"
#include "kcm/local_calculus.hpp"
#include "kcm/pipeline.hpp"
#include "kcm/polynomial.hpp"
#include "kcm/thermo.hpp"
#include "kcm/verify.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kcm;

namespace {

// Rationals cross the boundary as "p/q" strings; the Python layer turns them into Fractions.
Rational to_rational(const py::handle& value) { return parse_rational(py::str(value).cast<std::string>()); }

py::dict polynomial_dict(const MultilinearPolynomial& p) {
  py::dict out;
  for (const auto& [sites, coeff] : p.terms()) out[py::tuple(py::cast(sites))] = to_string(coeff);
  return out;
}

py::list decomposition_list(const PolynomialDecomposition& d) {
  py::list out;
  for (const auto& part : d.degree_terms) out.append(polynomial_dict(part));
  return out;
}

ModelParams make_params(int m, const py::object& rho, double b, double gamma, int n, long ring_size) {
  return ModelParams(m, to_rational(rho), b, gamma, n, ring_size);
}

}  // namespace

PYBIND11_MODULE(_kcm, mod) {
  mod.doc() = "Weakly asymmetric constrained exclusion process: exact calculus, KMC and estimators";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(mod, "InvalidInput", PyExc_ValueError);
  py::register_exception<SizeLimit>(mod, "SizeLimit", PyExc_OverflowError);
  py::register_exception<NoCluster>(mod, "NoCluster", PyExc_ValueError);

  py::class_<ModelParams>(mod, "ModelParams")
      .def(py::init(&make_params), py::arg("m"), py::arg("rho"), py::arg("b"), py::arg("gamma"), py::arg("n"),
           py::arg("ring_size") = 0)
      .def_property_readonly("m", &ModelParams::m)
      .def_property_readonly("rho", [](const ModelParams& p) { return to_string(p.rho()); })
      .def_property_readonly("b", &ModelParams::b)
      .def_property_readonly("gamma", &ModelParams::gamma)
      .def_property_readonly("n", &ModelParams::n)
      .def_property_readonly("ring_size", &ModelParams::ring_size)
      .def_property_readonly("skew", &ModelParams::skew)
      .def("__repr__", &ModelParams::describe);

  py::class_<Trajectory>(mod, "Trajectory")
      .def_property_readonly("initial", [](const Trajectory& t) { return t.initial.to_string(); })
      .def_property_readonly("events",
                             [](const Trajectory& t) {
                               py::list out;
                               for (const Event& e : t.events) out.append(py::make_tuple(e.time, e.bond, e.direction));
                               return out;
                             })
      .def_property_readonly("sampling_times", [](const Trajectory& t) { return t.sampling_times; })
      .def_readonly("t_max", &Trajectory::t_max)
      .def_readonly("truncated", &Trajectory::truncated)
      .def("snapshots", [](const Trajectory& t) {
        std::vector<std::string> out;
        for (const auto& cfg : t.snapshots()) out.push_back(cfg.to_string());
        return out;
      });

  mod.def("run", &run, py::arg("params"), py::arg("t_max"), py::arg("sampling_dt") = 0.0, py::arg("seed") = 1,
          py::arg("stream_id") = 0, "Equilibrium-started trajectory of the accelerated process.");
  mod.def(
      "sample_bernoulli",
      [](long size, double rho, std::uint64_t seed, std::uint64_t stream) {
        return sample_bernoulli(size, rho, seed, stream).to_string();
      },
      py::arg("ring_size"), py::arg("rho"), py::arg("seed"), py::arg("stream_id") = 0);
  mod.def(
      "is_blocked", [](const std::string& eta, int m) { return is_blocked(Configuration::from_string(eta), m); },
      py::arg("eta"), py::arg("m"));

  mod.def(
      "verify_gradient_condition",
      [](int m) {
        const GradientReport r = verify_gradient_condition(m);
        return py::dict(py::arg("passed") = r.passed, py::arg("checked_patterns") = r.checked_patterns,
                        py::arg("first_failure") = r.first_failure);
      },
      py::arg("m"));
  mod.def(
      "verify_stationarity",
      [](int m, const py::object& skew, int width, bool corrupted) {
        const StationarityReport r = verify_stationarity(RateSpec{m, to_rational(skew), corrupted}, width);
        return py::dict(py::arg("passed") = r.passed, py::arg("checked_patterns") = r.checked_patterns,
                        py::arg("first_failure") = r.first_failure);
      },
      py::arg("m"), py::arg("skew"), py::arg("width") = 8, py::arg("corrupted") = false);
  mod.def(
      "asym_polynomials",
      [](int m, const py::object& rho, const py::object& b) {
        return decomposition_list(asym_polynomials(m, to_rational(rho), to_rational(b)));
      },
      py::arg("m"), py::arg("rho"), py::arg("b"),
      "Homogeneous parts P_0..P_{m+1}, each {sites: 'p/q'} in the centered variables.");
  mod.def(
      "center_monomial",
      [](const std::vector<int>& sites, const py::object& rho) {
        return decomposition_list(center_monomial(sites, to_rational(rho)));
      },
      py::arg("sites"), py::arg("rho"));
  mod.def(
      "exact_bad_box_probability",
      [](const py::object& rho, long ell, int m) { return to_string(exact_bad_box_probability(to_rational(rho), ell, m)); },
      py::arg("rho"), py::arg("ell"), py::arg("m"));
  mod.def(
      "bad_box_bound", [](const py::object& rho, long ell, int m) { return to_string(bad_box_bound(to_rational(rho), ell, m)); },
      py::arg("rho"), py::arg("ell"), py::arg("m"));
  mod.def(
      "flux_second",
      [](int m, const py::object& b, const py::object& rho) {
        return to_string(ExactThermo(m, to_rational(b)).flux_second(to_rational(rho)));
      },
      py::arg("m"), py::arg("b"), py::arg("rho"));

  mod.def(
      "exchange_path",
      [](const std::string& eta, long y, long z, long anchor, long length, int m) {
        const Configuration cfg = Configuration::from_string(eta);
        const ExchangePath path = build_exchange_path(cfg, y, z, BoxSpec{anchor, length}, m);
        const PathReport r = validate_exchange_path(cfg, path, m);
        return py::dict(py::arg("moves") = path.moves, py::arg("legal") = r.legal, py::arg("exact") = r.exact,
                        py::arg("restored") = r.restored, py::arg("max_bond_usage") = r.max_bond_usage,
                        py::arg("length_bound") = path.length_bound);
      },
      py::arg("eta"), py::arg("y"), py::arg("z"), py::arg("box_anchor"), py::arg("box_length"), py::arg("m"));

  mod.def("exact_mean_current", &exact_mean_current, py::arg("params"));
  mod.def(
      "estimate_mean_current",
      [](const ModelParams& p, double t, int n_traj, std::uint64_t seed, unsigned threads) {
        const EstimatorReport r = estimate_mean_current(p, t, n_traj, seed, threads);
        return py::make_tuple(r.estimate, r.std_error);
      },
      py::arg("params"), py::arg("t"), py::arg("n_traj"), py::arg("seed") = 1, py::arg("threads") = 1);
  mod.def("gaussian_ou_covariance", &gaussian_ou_covariance, py::arg("sigma"), py::arg("t"), py::arg("rho"), py::arg("m"));
  mod.def(
      "ou_covariance_gaussian",
      [](double width, double t, double rho, int m) {
        const TestFunction h = TestFunction::gaussian(0.0, width);
        return ou_covariance_oracle(h, h, t, rho, m);
      },
      py::arg("width"), py::arg("t"), py::arg("rho"), py::arg("m"), "Quadrature oracle for a centered Gaussian.");
  mod.def("bgp2_rhs_bound", &bgp2_rhs_bound, py::arg("t"), py::arg("ell"), py::arg("n"), py::arg("k") = 1.0);
  mod.def(
      "fit_power_law",
      [](const std::vector<double>& ns, const std::vector<double>& values) {
        const ScalingFit f = fit_power_law(ns, values);
        return py::dict(py::arg("exponent") = f.exponent, py::arg("prefactor") = f.prefactor,
                        py::arg("r_squared") = f.r_squared, py::arg("exponent_std_error") = f.exponent_std_error);
      },
      py::arg("ns"), py::arg("values"));

  mod.def(
      "run_pipeline",
      [](const std::string& command, const std::map<std::string, std::string>& settings) {
        RunConfig config;
        for (const auto& [key, value] : settings) apply_setting(config, key, value);
        PipelineOutput out;
        {
          py::gil_scoped_release release;
          if (command == "verify") out = verify_pipeline(config);
          else if (command == "simulate") out = simulate_pipeline(config);
          else if (command == "bgp2") out = bgp2_pipeline(config);
          else if (command == "covariance") out = covariance_pipeline(config);
          else if (command == "sample-equilibrium") out = sample_equilibrium_pipeline(config);
          else throw InvalidInput("unknown command '" + command + "'");
        }
        return py::make_tuple(out.summary.dump(), out.csv, out.passed);
      },
      py::arg("command"), py::arg("settings"), "Returns (summary JSON text, CSV text, passed).");
}

// Copyright 2026 The persym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "persym/cli.hpp"
#include "persym/detectors.hpp"
#include "persym/error.hpp"
#include "persym/invariance.hpp"
#include "persym/montecarlo.hpp"
#include "persym/persym_core.hpp"
#include "persym/random.hpp"
#include "persym/scenario.hpp"
#include "persym/sufficient_stats.hpp"

namespace py = pybind11;
using namespace persym;

namespace {

PyObject* g_error_type = nullptr;

Detector detector_from(const std::string& name) {
  const auto d = parse_detector(name);
  if (!d) throw py::value_error("unknown detector: " + name);
  return *d;
}

std::vector<NamedStatistic> statistics_from(const std::vector<std::string>& names) {
  std::vector<NamedStatistic> out;
  for (const auto& name : names) {
    if (name == "trace-psi0") {
      out.push_back(trace_psi0_statistic());
    } else {
      out.push_back(detector_statistic(detector_from(name)));
    }
  }
  return out;
}

MisComponent component_from(const std::string& name) {
  if (name == "t1") return MisComponent::kT1;
  if (name == "t2") return MisComponent::kT2;
  if (name == "t3") return MisComponent::kT3;
  throw py::value_error("component must be t1, t2 or t3");
}

py::dict estimate_dict(const EstimateWithCI& e) {
  py::dict d;
  d["point"] = e.point;
  d["lo"] = e.lo;
  d["hi"] = e.hi;
  d["n"] = e.n;
  return d;
}

}  // namespace

PYBIND11_MODULE(_persym, m) {
  m.doc() = "Persymmetric adaptive detection: canonical form, maximal invariant, detectors";

  g_error_type = PyErr_NewException("persym.PersymError", PyExc_ValueError, nullptr);
  m.add_object("PersymError", py::handle(g_error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(g_error_type);
      py::object inst = type(e.what());
      inst.attr("kind") = to_string(e.kind());
      inst.attr("detail") = e.detail();
      PyErr_SetObject(g_error_type, inst.ptr());
    }
  });

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));

  // Canonical form
  m.def("exchange_matrix", &exchange_matrix, py::arg("n"));
  m.def("persymmetric_unitary", &persymmetric_unitary, py::arg("n"));
  m.def("steering", [](Eigen::Index n, double nu) { return steering(n, nu).entries; },
        py::arg("n"), py::arg("nu") = 0.0);
  m.def("covariance_model",
        [](Eigen::Index n, double rho, double fc, double cnr_db) {
          return covariance_model(n, rho, fc, cnr_db).entries;
        },
        py::arg("n"), py::arg("rho"), py::arg("doppler_fc") = 0.0, py::arg("cnr_db") = 20.0);
  m.def("is_persymmetric",
        [](const Eigen::MatrixXcd& a, double tol) { return is_persymmetric(a, tol); },
        py::arg("m"), py::arg("tol") = kDefaultPersymmetryTol);

  py::class_<CanonicalTransform>(m, "CanonicalTransform")
      .def_property_readonly("T", &CanonicalTransform::T)
      .def_property_readonly("V", &CanonicalTransform::V)
      .def_property_readonly("J", &CanonicalTransform::J)
      .def_property_readonly("n", &CanonicalTransform::size)
      .def("transform_covariance", &CanonicalTransform::transform_covariance, py::arg("m0"));
  m.def("build_transform",
        [](const Eigen::VectorXcd& s, double tol) { return build_transform({s}, tol); },
        py::arg("s"), py::arg("tol") = kDefaultPersymmetryTol);

  py::class_<CanonicalizedData>(m, "CanonicalizedData")
      .def_readonly("z1", &CanonicalizedData::z1)
      .def_readonly("z2", &CanonicalizedData::z2)
      .def_readonly("z1k", &CanonicalizedData::z1k)
      .def_readonly("z2k", &CanonicalizedData::z2k);
  m.def("canonicalize",
        [](const Eigen::VectorXcd& r, const Eigen::MatrixXcd& rk,
           const CanonicalTransform& xf) { return canonicalize(r, rk, xf); },
        py::arg("r"), py::arg("rk"), py::arg("transform"));

  // Sufficient statistic and MIS
  py::class_<SufficientStatistic>(m, "SufficientStatistic")
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, Eigen::Index>(), py::arg("zp"),
           py::arg("s"), py::arg("k"))
      .def_property_readonly("Zp", &SufficientStatistic::Zp)
      .def_property_readonly("S", &SufficientStatistic::S)
      .def_property_readonly("n", &SufficientStatistic::n)
      .def_property_readonly("k", &SufficientStatistic::k);
  m.def("assemble", &assemble, py::arg("data"));

  py::class_<PsiPair>(m, "PsiPair")
      .def_readonly("psi0", &PsiPair::psi0)
      .def_readonly("psi1", &PsiPair::psi1)
      .def_readonly("eigenvalues", &PsiPair::lambda)
      .def_readonly("n", &PsiPair::n)
      .def_property_readonly("trace0", &PsiPair::trace0)
      .def_property_readonly("trace1", &PsiPair::trace1)
      .def_property_readonly("det0", &PsiPair::det0)
      .def_property_readonly("det1", &PsiPair::det1);
  m.def("compute_psi", &compute_psi, py::arg("stat"));
  m.def("make_psi_pair", &make_psi_pair, py::arg("psi0"), py::arg("psi1"));
  m.def("eig2_desc", py::overload_cast<const Eigen::Matrix2d&>(&eig2_desc), py::arg("a"));

  py::class_<MISVector>(m, "MISVector")
      .def(py::init([](double t1, double t2, double t3) { return MISVector{t1, t2, t3}; }),
           py::arg("t1"), py::arg("t2"), py::arg("t3"))
      .def_readonly("t1", &MISVector::t1)
      .def_readonly("t2", &MISVector::t2)
      .def_readonly("t3", &MISVector::t3)
      .def("as_tuple", &MISVector::as_array)
      .def("__repr__", [](const MISVector& t) {
        std::ostringstream ss;
        ss.precision(17);
        ss << "MISVector(t1=" << t.t1 << ", t2=" << t.t2 << ", t3=" << t.t3 << ")";
        return ss.str();
      });
  m.def("mis", &mis, py::arg("psi"));

  py::class_<ScaleEstimates>(m, "ScaleEstimates")
      .def_readonly("gamma0_hat", &ScaleEstimates::gamma0_hat)
      .def_readonly("gamma1_hat", &ScaleEstimates::gamma1_hat)
      .def_readonly("beta0", &ScaleEstimates::beta0)
      .def_readonly("beta1", &ScaleEstimates::beta1);
  m.def("scale_estimates", &scale_estimates, py::arg("psi"), py::arg("k"), py::arg("n"));

  // Detectors
  m.def("detector_names", [] {
    std::vector<std::string> out;
    for (Detector d : kAllDetectors) out.emplace_back(to_string(d));
    return out;
  });
  m.def("evaluate",
        [](const std::string& detector, const PsiPair& psi, Eigen::Index k, Eigen::Index n,
           bool mis_form_) {
          return evaluate(detector_from(detector), mis_form_ ? Form::kMisForm : Form::kDirect,
                          psi, k, n)
              .value;
        },
        py::arg("detector"), py::arg("psi"), py::arg("k"), py::arg("n"),
        py::arg("mis_form") = false);
  m.def("mis_form",
        [](const std::string& detector, const MISVector& t, Eigen::Index k, Eigen::Index n) {
          return mis_form(detector_from(detector), t, k, n);
        },
        py::arg("detector"), py::arg("t"), py::arg("k"), py::arg("n"));
  m.def("g_gamma_num", &g_gamma_num, py::arg("t1_over_t2"), py::arg("k"), py::arg("n"));
  m.def("g_gamma_den", &g_gamma_den, py::arg("t3"), py::arg("k"), py::arg("n"));

  // Invariance group
  py::class_<GroupElement>(m, "GroupElement")
      .def(py::init([](Eigen::MatrixXd g, Eigen::Matrix2d u, double phi) {
             GroupElement e{std::move(g), u, phi};
             validate(e);
             return e;
           }),
           py::arg("G"), py::arg("U"), py::arg("phi"))
      .def_readonly("G", &GroupElement::G)
      .def_readonly("U", &GroupElement::U)
      .def_readonly("phi", &GroupElement::phi);
  m.def("identity_element", &identity_element, py::arg("n"));
  m.def("inverse", &inverse, py::arg("a"));
  m.def("compose", &compose, py::arg("a"), py::arg("b"));
  m.def("act", &act, py::arg("element"), py::arg("stat"));
  m.def("sample_group_element",
        [](Eigen::Index n, std::uint64_t seed, std::uint64_t index, double spread) {
          Rng rng = make_stream(seed, index);
          return sample_group_element(n, rng, spread);
        },
        py::arg("n"), py::arg("seed"), py::arg("index") = 0, py::arg("spread") = 1.0);

  // Scenario
  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n", &ScenarioConfig::n)
      .def_readwrite("k", &ScenarioConfig::k)
      .def_readwrite("rho", &ScenarioConfig::rho)
      .def_readwrite("doppler_fc", &ScenarioConfig::doppler_fc)
      .def_readwrite("cnr_db", &ScenarioConfig::cnr_db)
      .def_readwrite("gamma", &ScenarioConfig::gamma)
      .def_readwrite("nu", &ScenarioConfig::nu)
      .def_readwrite("alpha", &ScenarioConfig::alpha)
      .def_readwrite("sinr_db", &ScenarioConfig::sinr_db)
      .def_readwrite("alpha_phase", &ScenarioConfig::alpha_phase)
      .def_property(
          "hypothesis",
          [](const ScenarioConfig& c) { return std::string(to_string(c.hypothesis)); },
          [](ScenarioConfig& c, const std::string& h) {
            if (h == "H0") {
              c.hypothesis = Hypothesis::kH0;
            } else if (h == "H1") {
              c.hypothesis = Hypothesis::kH1;
            } else {
              throw py::value_error("hypothesis must be H0 or H1");
            }
          })
      .def("validate", &ScenarioConfig::validate, py::arg("require_mis") = false)
      .def("null_hypothesis", &ScenarioConfig::null_hypothesis)
      .def("with_sinr", &ScenarioConfig::with_sinr, py::arg("sinr_db"), py::arg("phase") = 0.0);

  py::class_<ScenarioModel>(m, "ScenarioModel")
      .def(py::init<const ScenarioConfig&>(), py::arg("config"))
      .def_property_readonly("sinr", &ScenarioModel::sinr)
      .def_property_readonly("alpha", &ScenarioModel::alpha)
      .def_property_readonly("steering", [](const ScenarioModel& s) { return s.steering_vector().entries; })
      .def_property_readonly("covariance", [](const ScenarioModel& s) { return s.covariance().entries; })
      .def("sample",
           [](const ScenarioModel& s, std::uint64_t seed, std::uint64_t index) {
             Rng rng = make_stream(seed, index);
             const Dataset d = s.sample(rng);
             return py::make_tuple(d.r, d.rk);
           },
           py::arg("seed"), py::arg("index") = 0)
      .def("sample_statistic",
           [](const ScenarioModel& s, std::uint64_t seed, std::uint64_t index) {
             Rng rng = make_stream(seed, index);
             return s.sample_statistic(rng);
           },
           py::arg("seed"), py::arg("index") = 0);
  m.def("sample_white_statistic",
        [](Eigen::Index n, Eigen::Index k, std::uint64_t seed, std::uint64_t index) {
          Rng rng = make_stream(seed, index);
          return sample_white_statistic(n, k, rng);
        },
        py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("index") = 0);

  // Monte Carlo
  m.def("run_trials",
        [](const ScenarioConfig& cfg, const std::vector<std::string>& statistics,
           std::size_t trials, std::uint64_t seed, unsigned workers) {
          const ScenarioModel model(cfg);
          const auto stats = statistics_from(statistics);
          py::gil_scoped_release release;
          return run_trials(model, stats, trials, seed, workers);
        },
        py::arg("config"), py::arg("statistics"), py::arg("trials"), py::arg("seed"),
        py::arg("workers") = 1);
  m.def("calibrate_threshold",
        [](std::vector<double> samples, double pfa) {
          const CalibrationResult c = calibrate_threshold(std::move(samples), pfa);
          py::dict d;
          d["threshold"] = c.threshold;
          d["target_pfa"] = c.target_pfa;
          d["achieved_pfa"] = c.achieved_pfa;
          d["ci_lo"] = c.ci_lo;
          d["ci_hi"] = c.ci_hi;
          d["trials"] = c.trials;
          return d;
        },
        py::arg("h0_samples"), py::arg("pfa"));
  m.def("estimate_rate",
        [](const std::vector<double>& samples, double eta) {
          return estimate_dict(estimate_rate(samples, eta));
        },
        py::arg("samples"), py::arg("threshold"));
  m.def("cfar_sweep",
        [](const std::vector<std::string>& statistics, const ScenarioConfig& base,
           const std::vector<double>& gammas, const std::vector<double>& rhos, double pfa,
           std::size_t trials, std::uint64_t seed, unsigned workers,
           std::size_t calibration_trials) {
          const auto stats = statistics_from(statistics);
          CfarSweepResult res;
          {
            py::gil_scoped_release release;
            res = cfar_sweep(stats, base, gammas, rhos, pfa, trials, seed, workers,
                             calibration_trials);
          }
          py::list cells;
          for (const CfarCell& c : res.cells) {
            py::dict d;
            d["statistic"] = c.statistic;
            d["gamma"] = c.gamma;
            d["rho"] = c.rho;
            d["pfa"] = estimate_dict(c.pfa);
            d["pass"] = c.pass;
            d["reference"] = c.reference;
            cells.append(d);
          }
          return cells;
        },
        py::arg("statistics"), py::arg("base"), py::arg("gamma_grid"), py::arg("rho_grid"),
        py::arg("pfa"), py::arg("trials"), py::arg("seed"), py::arg("workers") = 1,
        py::arg("calibration_trials") = 0);
  m.def("roc_curve",
        [](const std::string& detector, const ScenarioConfig& cfg, double sinr_db,
           std::vector<double> pfa_grid, std::size_t trials, std::uint64_t seed,
           unsigned workers) {
          std::vector<RocPoint> pts;
          {
            py::gil_scoped_release release;
            pts = roc_curve(detector_from(detector), cfg, sinr_db, std::move(pfa_grid), trials,
                            seed, workers);
          }
          py::list out;
          for (const RocPoint& p : pts) {
            py::dict d;
            d["pfa"] = p.pfa;
            d["threshold"] = p.threshold;
            d["pd"] = estimate_dict(p.pd);
            out.append(d);
          }
          return out;
        },
        py::arg("detector"), py::arg("config"), py::arg("sinr_db"), py::arg("pfa_grid"),
        py::arg("trials"), py::arg("seed"), py::arg("workers") = 1);
  m.def("ks_two_sample", &ks_two_sample, py::arg("a"), py::arg("b"));
  m.def("ancillarity_check",
        [](const ScenarioConfig& h0, const ScenarioConfig& h1, std::size_t n_samples,
           std::uint64_t seed, const std::string& component, unsigned workers) {
          const MisComponent c = component_from(component);
          KsResult r;
          {
            py::gil_scoped_release release;
            r = ancillarity_check(h0, h1, n_samples, seed, c, workers);
          }
          py::dict d;
          d["statistic"] = r.statistic;
          d["critical"] = r.critical;
          d["pass"] = r.pass;
          return d;
        },
        py::arg("h0"), py::arg("h1"), py::arg("n_samples"), py::arg("seed"),
        py::arg("component") = "t3", py::arg("workers") = 1);

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "persym");
          std::ostringstream out;
          std::ostringstream err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}

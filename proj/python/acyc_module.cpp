// Python bindings for the main operations: asymptotic classes of torus
// trajectories, suspension solenoid classes, the trapping k-solenoid, the
// stable norm, and the config-driven runner. Vectors cross the boundary as
// plain lists so no numpy dependency is baked in.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>
#include <vector>

#include "acyc/asymptotic.hpp"
#include "acyc/calibration.hpp"
#include "acyc/config.hpp"
#include "acyc/curves.hpp"
#include "acyc/ksolenoid.hpp"
#include "acyc/runner.hpp"
#include "acyc/solenoid.hpp"
#include "acyc/stable_norm.hpp"

namespace py = pybind11;
using namespace acyc;

namespace {

Vec toVec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

IVec toIVec(const std::vector<long long>& v) {
  IVec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

std::vector<double> fromVec(const Vec& v) {
  return {v.data(), v.data() + v.size()};
}

py::dict estimateDict(const AsymptoticEstimate& e) {
  py::dict d;
  d["value"] = fromVec(e.value);
  d["converged"] = e.converged;
  d["residual"] = e.residual;
  d["windows_used"] = e.windowsUsed;
  return d;
}

py::dict linearClass(const std::vector<double>& velocity, double tol, int windowCount) {
  TorusGeometry g(Mat::Identity(static_cast<int>(velocity.size()),
                                static_cast<int>(velocity.size())),
                  {});
  auto curve = linear_flow_curve(toVec(velocity), Vec::Zero(static_cast<int>(velocity.size())));
  auto sched = WindowSchedule::geometric(5.0, 5.0, windowCount);
  auto res = schwartzman_class(curve, g, tol, sched);
  py::dict d = estimateDict(res.joint);
  d["positive"] = fromVec(res.positive);
  d["negative"] = fromVec(res.negative);
  d["converged"] = res.converged;
  return d;
}

double loopNorm(const std::vector<long long>& cls) {
  int dim = static_cast<int>(cls.size());
  TorusGeometry g(Mat::Identity(dim, dim), {});
  return minimal_loop_length(g, toIVec(cls)).value;
}

double stableNormFlat(const std::vector<long long>& cls, int nMax) {
  int dim = static_cast<int>(cls.size());
  TorusGeometry g(Mat::Identity(dim, dim), {});
  return stable_norm(g, toIVec(cls), nMax).value;
}

py::dict leafClass(double alpha, double x0, long long steps, double tol) {
  auto sol = realize_as_torus_flow(alpha);
  auto res = leaf_schwartzman_class(sol, x0, steps, tol);
  py::dict d;
  d["symbolic"] = estimateDict(res.symbolic);
  if (res.geometric) d["geometric"] = estimateDict(*res.geometric);
  d["ruelle_sullivan"] = fromVec(ruelle_sullivan_class(sol));
  return d;
}

double measureDistance(double alpha, double seed, long long steps) {
  return empirical_transversal_measure(realize_as_torus_flow(alpha), seed, steps).distance;
}

py::dict kClassT3(double alpha, double x0, long long b0, int windowCount, double tol) {
  auto sol = t3_trapping_solenoid(alpha, 1.0 - alpha, 1.0);
  std::vector<KWindow> ladder;
  long long b = b0;
  for (int j = 0; j < windowCount; ++j) {
    ladder.push_back({-b, b});
    b *= 2;
  }
  auto res = k_schwartzman_class(sol, x0, ladder, tol);
  py::dict d = estimateDict(res.estimate);
  d["ruelle_sullivan"] = fromVec(ruelle_sullivan_class(sol));
  d["last_volume"] = res.lastVolume;
  return d;
}

std::string validateConfig(const std::string& text) {
  return parse_config_text(text).canonicalText;
}

py::dict runConfig(const std::string& text, const std::string& outDir, int threads) {
  auto cfg = parse_config_text(text);
  auto rep = run(cfg, outDir, threads);
  py::dict d;
  d["exit_code"] = rep.exitCode;
  d["converged"] = rep.converged;
  d["all_passed"] = rep.allPassed;
  d["report_json"] = rep.json;
  py::list rows;
  for (const auto& a : rep.assertions) {
    py::dict r;
    r["name"] = a.name;
    r["pass"] = a.pass;
    r["detail"] = a.detail;
    rows.append(r);
  }
  d["assertions"] = rows;
  d["artifacts"] = rep.artifacts;
  return d;
}

py::list goldenManifest() {
  py::list out;
  for (const auto& e : list_golden()) {
    py::dict d;
    d["name"] = e.name;
    d["file"] = e.file;
    d["subcommand"] = e.subcommand;
    d["expected_exit"] = e.expectedExit;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_acyc, m) {
  m.doc() = "Asymptotic homology classes of torus trajectories and measured solenoids";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def("linear_class", &linearClass, py::arg("velocity"), py::arg("tol") = 1e-3,
        py::arg("window_count") = 12,
        "Schwartzman class of the linear flow with the given velocity on the flat torus.");
  m.def("loop_norm", &loopNorm, py::arg("cls"),
        "Length of the shortest flat-torus loop in the given integer class.");
  m.def("stable_norm_flat", &stableNormFlat, py::arg("cls"), py::arg("n_max") = 6,
        "Stable norm of an integer class for the flat metric.");
  m.def("leaf_class", &leafClass, py::arg("alpha"), py::arg("x0") = 0.1,
        py::arg("steps") = 100000, py::arg("tol") = 1e-3,
        "Leaf class of the rotation-by-alpha suspension, with its Ruelle-Sullivan target.");
  m.def("measure_distance", &measureDistance, py::arg("alpha"), py::arg("seed") = 0.1,
        py::arg("steps") = 10000,
        "Distance of the empirical transversal measure to the invariant one.");
  m.def("k_class_t3", &kClassT3, py::arg("alpha"), py::arg("x0") = 0.15, py::arg("b0") = 16,
        py::arg("window_count") = 10, py::arg("tol") = 1e-3,
        "k=2 class-per-volume quotient of the immersed trapping solenoid in T^3.");
  m.def("validate_config", &validateConfig, py::arg("text"),
        "Parse and validate an experiment config; returns the canonical text.");
  m.def("run_config", &runConfig, py::arg("text"), py::arg("out_dir"), py::arg("threads") = 1,
        "Run a validated experiment config and grade its declared assertions.");
  m.def("golden_manifest", &goldenManifest,
        "Bundled configs with their expected exit codes, in fixed order.");
}

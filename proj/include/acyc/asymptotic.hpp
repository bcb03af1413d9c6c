#pragma once

#include <string>
#include <utility>
#include <vector>

#include "acyc/calibration.hpp"
#include "acyc/common.hpp"
#include "acyc/curves.hpp"
#include "acyc/geometry.hpp"
#include "acyc/homology.hpp"

// Windowed homology classes of lifted curves, the five computational routes
// to the asymptotic class, convergence detection over geometric window
// schedules, and cluster-set scanning with balanced tagging.

namespace acyc {

enum class Route { loop, calib, form, circle, cross };

struct WindowSchedule {
  std::vector<std::pair<double, double>> windows;  // (s, t), t - s strictly increasing

  // symmetric-ish two-sided schedule: (-s0 r^j, t0 r^j)
  static WindowSchedule geometric(double s0, double t0, int count, double ratio = 2.0);
  static WindowSchedule explicitPairs(std::vector<std::pair<double, double>> pairs);
};

// closed 1-form a.dx + d(phi) with trig-polynomial potential phi
struct ScalarTrig {
  double constant = 0.0;
  std::vector<TrigTerm> terms;  // cosAmp cos(2 pi <k,x>) + sinAmp sin(2 pi <k,x>)
  double eval(const Vec& x) const;
  Vec grad(const Vec& x) const;
};
struct OneForm {
  Vec a;             // cohomology coordinates in the dx basis
  ScalarTrig exact;  // optional potential; the form is a.dx + d(exact)
};

struct Hypersurface {
  Eigen::VectorXi normal;  // primitive integer normal
  double offset = 0.0;     // level <normal, x> = offset mod 1
  int sign = 1;            // orientation
};

struct RoutePayload {
  double tol = 1e-3;
  // calib
  const Calibrator* phi = nullptr;
  // form
  std::vector<OneForm> forms;
  double formStep = 0.02;
  // circle
  std::vector<Eigen::VectorXi> circles;
  // cross
  std::vector<Hypersurface> surfaces;
  double crossStep = 0.05;
  double transversalityTol = 1e-8;
};

struct AsymptoticEstimate {
  Vec value;
  Route route;
  double residual = 0.0;  // max pairwise distance over the last three windows
  bool converged = false;
  int windowsUsed = 0;
  std::vector<std::string> diagnostics;  // e.g. rejected near-tangent windows
};

// Integer class of the loop c|[s,t] closed by the shortest closing path.
IVec window_class(const LiftedCurve& curve, const TorusGeometry& geom, double s, double t);

// Same quantity without integer rounding once coordinates leave the exactly
// representable range; always usable, returned as reals.
Vec normalized_window(const LiftedCurve& curve, const TorusGeometry& geom, double s, double t);

AsymptoticEstimate route_estimate(const LiftedCurve& curve, const TorusGeometry& geom,
                                  Route route, const WindowSchedule& schedule,
                                  const RoutePayload& payload);

struct SchwartzmanResult {
  AsymptoticEstimate joint;
  Vec positive, negative;  // one-sided limits [c+], [c-]
  bool positiveStable = false, negativeStable = false;
  bool converged = false;          // joint stabilized and the one-sided limits agree
  double clusterDiameter = 0.0;    // spread of the latest windowed classes
  std::vector<std::string> notes;
};

SchwartzmanResult schwartzman_class(const LiftedCurve& curve, const TorusGeometry& geom,
                                    double tol, const WindowSchedule& schedule);

struct WindowGrid {
  std::vector<std::pair<double, double>> pairs;  // two-sided windows (s < 0 < t)
  std::vector<double> posTimes;                  // one-sided (0, t)
  std::vector<double> negTimes;                  // one-sided (s, 0), stored as |s|
  double balancedTol = 1e-2;                     // one-sided drift over the last decade

  // independent geometric exponents so tau = t/(t-s) explores [0,1]
  static WindowGrid geometric(double s0, double t0, int countS, int countT,
                              double ratio = 2.0);
  // all symmetric pairs over the given times plus the one-sided scans
  static WindowGrid fromTimes(const std::vector<double>& times);
};

struct ClusterEstimate {
  PointSet full, positive, negative, balanced;
};

ClusterEstimate cluster_scan(const LiftedCurve& curve, const TorusGeometry& geom,
                             const WindowGrid& grid);

struct BalancedCheckReport {
  bool hullOk = false, segmentOk = false;
  double worstHullDistance = 0.0;
  double worstSegmentGap = 0.0;
  int pairsTested = 0;
  Vec worstHullPoint, worstSegmentA, worstSegmentB;
  bool ok() const { return hullOk && segmentOk; }
};

// balanced samples lie in the sampled additive hull C+ +^ C-, and every
// sampled segment [a, b] with a in C+, b in C- passes near some balanced
// sample
BalancedCheckReport balanced_cluster_check(const ClusterEstimate& est, double tol);

// orientation-preserving reparametrization sigma(u) = lambda sign(u) |u|^p
struct SpeedFunction {
  double lambda = 1.0;
  double exponent = 1.0;
};

struct UnparametrizedCluster {
  PointSet samples;
  ConeResult cone;
};

UnparametrizedCluster unparametrized_cluster(const LiftedCurve& curve,
                                             const TorusGeometry& geom,
                                             const std::vector<SpeedFunction>& speeds,
                                             const WindowGrid& grid,
                                             double angularTol = 0.05,
                                             double zeroTol = 0.05);

}  // namespace acyc

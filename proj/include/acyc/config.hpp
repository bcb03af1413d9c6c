#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acyc/asymptotic.hpp"
#include "acyc/common.hpp"
#include "acyc/curves.hpp"
#include "acyc/geometry.hpp"
#include "acyc/ksolenoid.hpp"
#include "acyc/solenoid.hpp"

// Experiment configuration: a strict JSON schema parsed into a validated
// plan. Unknown fields, wrong types, and non-positive tolerances are
// ConfigErrors whose message names the JSON path of the offending field
// (e.g. "subject.base.alpha"). The schema is versioned; reports echo the
// normalized document so a report's config block re-validates as-is.

namespace acyc {

struct GeometryConfig {
  int dim = 2;
  Mat gram;  // identity when left empty
  std::vector<ConformalTerm> conformal;

  TorusGeometry build() const;
};

// curve subjects: linearFlow | loop | flow | counterexample | oscillator
struct CurveConfig {
  std::string type;

  Vec velocity, x0;  // linearFlow; x0 defaults to the origin
  bool arcLength = false;

  IVec loopClass;  // loop: straight representative, arc-length parametrized

  TrigField field;  // flow: integrated trig vector field on [-T, T]
  double flowT = 64.0;
  double odeTol = 1e-10;

  CounterexampleSpec wild;
  OscillatorSpec osc;

  // optional bounded displacement applied after construction
  std::vector<std::vector<PerturbTerm>> perturb;
  double perturbBound = 0.0;

  int dim() const;
  LiftedCurve build(const TorusGeometry& geom) const;
};

// transversal base: rotation | iet | odometer | atoms
struct BaseConfig {
  std::string type;
  bool golden = false;  // rotation with "alpha": "golden"
  double alpha = 0.0;
  std::vector<double> lengths;  // iet
  std::vector<int> perm;
  int depth = 16;               // odometer
  std::vector<double> xs, ws;   // atoms

  TransversalSystem build() const;
};

// roof: constant + trig terms, or piecewise cells (mutually exclusive)
struct RoofConfig {
  double constant = 1.0;
  std::vector<TrigTerm> terms;
  std::vector<double> edges, values;

  RoofFunction build() const;
};

struct PhiCellConfig {
  double lo = 0.0, hi = 0.0;
  IVec value;
};

// cells must tile [0, 1) without gaps or overlaps
PiecewiseClass build_class(const std::vector<PhiCellConfig>& cells);

struct SolenoidConfig {
  BaseConfig base;
  bool realize = false;  // canonical torus-flow suspension of the rotation
  bool realizeArcLength = false;
  RoofConfig roof;
  std::vector<PhiCellConfig> phi;
  std::vector<double> seeds;  // explicit transversal start points
  int seedCount = 0;          // or a count drawn deterministically from `seed`
  long long N = 100000;
};

struct KSolenoidConfig {
  int k = 2;

  // canonical immersed model: suspension of the rotation with one wrap cell
  bool useT3 = false;
  double wrapLo = 0.0, wrapHi = 0.0;
  bool unitVolume = false;

  // explicit slab model
  BaseConfig base;
  RoofConfig separation, diameter, volume;
  std::vector<PhiCellConfig> phi;
  double epsilon0 = 0.25;

  std::optional<std::array<double, 3>> constants;  // c0,c1,c2; measured when absent

  std::vector<double> seeds;
  int seedCount = 0;
  long long b0 = 16;     // first window of the doubling ladder
  int windowCount = 8;
  double capVolume = 0.0;

  // exhaustion audit radii: explicit, dyadic 2^j, or seeded uniform draws
  std::vector<double> radii;
  int dyadicFrom = 0, dyadicTo = -1;
  int randomCount = 0;
  double randomLo = 0.0, randomHi = 0.0;
  int geometricSamples = 0;  // declared-vs-geometric class table audit size
};

struct StableNormConfig {
  std::vector<IVec> classes;
  int nMax = 6;
  int resolution = 16;
};

struct HomogeneityCheck {
  int i = 0, j = 0;     // classes[j] must be factor * classes[i]
  double factor = 1.0;
  double tol = 0.02;    // relative
};

// declared pass/fail criteria; each engaged entry becomes a report row and
// a failed one turns exit 0 into exit 1
struct AssertionsConfig {
  std::optional<bool> converged;

  std::optional<Vec> target;  // every route estimate near this value
  double targetTol = 1e-3;
  std::optional<double> routesAgreeTol;

  std::optional<bool> balanced;  // hull + segment check on the cluster scan
  std::optional<int> coneRays;
  std::vector<Vec> coneRaysNear;
  double coneTol = 0.05;

  std::optional<double> balancedSeparationMin;
  std::optional<double> fullApproachMax;
  std::optional<Vec> balancedNearTarget;
  double balancedNearTol = 1e-2;

  std::optional<double> leafMatchesRsTol;
  std::optional<double> geometricAgreeTol;
  std::optional<double> measureDistanceMax;
  std::optional<bool> exhaustionWithinBound;
  std::optional<bool> geometricTableExact;

  std::vector<double> targets;  // stablenorm per-class values
  double targetsTol = 1e-9;
  std::vector<HomogeneityCheck> homogeneity;
};

struct WindowScheduleConfig {
  double s0 = 5.0, t0 = 5.0;
  int count = 9;
  double ratio = 2.0;
};

struct GridScheduleConfig {
  std::vector<double> times;  // symmetric pairs + one-sided scans when set
  double s0 = 2.0, t0 = 2.0;
  int countS = 12, countT = 12;
  double ratio = 2.0;
};

struct ExperimentConfig {
  int schemaVersion = 1;
  std::string subcommand;
  GeometryConfig geometry;

  // exactly one engaged, selected by the subcommand
  CurveConfig curve;        // asymptotic, cluster, counterexample
  SolenoidConfig solenoid;
  KSolenoidConfig ksolenoid;
  StableNormConfig stableNorm;

  std::vector<Route> routes;  // asymptotic; all five when omitted
  std::optional<WindowScheduleConfig> window;
  std::optional<GridScheduleConfig> grid;
  std::map<std::string, double> tolerances;  // route, cluster, leaf, kclass
  std::uint64_t seed = 0;
  AssertionsConfig assertions;

  std::string canonicalText;  // normalized document, echoed into reports

  double tol(const std::string& name, double fallback) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// constructed, validated subjects (also exercised during parsing)
SuspensionSolenoid build_solenoid(const SolenoidConfig& cfg);
TrappingSolenoid build_trapping(const KSolenoidConfig& cfg);

}  // namespace acyc

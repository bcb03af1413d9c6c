#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acyc/asymptotic.hpp"
#include "acyc/common.hpp"
#include "acyc/curves.hpp"

// Measured 1-solenoids presented as suspensions over a single transversal:
// base dynamics with an invariant probability measure, a positive roof, and
// a piecewise-constant integer class attached to each return. The
// Ruelle-Sullivan class is an exact integral quotient; leaf classes are
// Birkhoff quotients watched for dyadic stabilization.

namespace acyc {

// Base dynamics on a coded unit interval. All four spaces share the [0,1)
// coordinate so cells, test intervals and orbits compose uniformly:
//   circle    x -> x + alpha mod 1, Lebesgue
//   iet       interval exchange (lengths, permutation), Lebesgue
//   odometer  depth-d states x = k/2^d, R adds 2^-d mod 1, uniform on the
//             2^d states; dyadic intervals are exact cylinder unions
//   atoms     weighted points permuted by a bijection of indices
struct TransversalSystem {
  enum class Space { circle, iet, odometer, atoms };

  Space space = Space::circle;
  bool ergodic = true;
  bool uniquelyErgodic = true;

  double alpha = 0.0;                // circle
  std::vector<double> ietLengths;    // iet; positive, normalized to sum 1
  std::vector<int> ietPerm;          // iet; permutation of 0..m-1
  int odoDepth = 16;                 // odometer; states k / 2^depth
  std::vector<double> atomX;         // atoms; distinct points in [0,1)
  std::vector<double> atomW;         // atoms; positive, normalized to sum 1
  std::vector<int> atomPerm;         // atoms; image index of each atom

  static TransversalSystem rotation(double alpha);
  static TransversalSystem goldenRotation();  // alpha = (sqrt(5)-1)/2
  static TransversalSystem iet(std::vector<double> lengths, std::vector<int> perm);
  static TransversalSystem dyadicOdometer(int depth = 16);
  static TransversalSystem twoAtoms(double w0, double w1);  // swap of two points
  static TransversalSystem atomCycle(std::vector<double> xs, std::vector<double> ws);

  double apply(double x) const;
  double applyInverse(double x) const;

  // mu([a, b)) for 0 <= a <= b <= 1; exact in every space
  double measureInterval(double a, double b) const;

  // integral of h against mu: exact state/atom sums for the discrete spaces,
  // composite midpoint with `panels` panels for the continuous ones
  double integrate(const std::function<double(double)>& h, int panels = 1 << 16) const;

  void validate() const;  // throws StructuralError on malformed data
};

// |int h(Rx) dmu - int h dmu| under the same quadrature; invariance witness
double invariance_defect(const TransversalSystem& sys,
                         const std::function<double(double)>& h, int panels = 1 << 16);

// positive return time over the base: a trig polynomial in the coded
// coordinate, or piecewise constant on cells when cellEdges is nonempty
struct RoofFunction {
  ScalarTrig trig;
  std::vector<double> cellEdges;   // ascending, first 0, last 1
  std::vector<double> cellValues;  // one per cell

  static RoofFunction constant(double value);
  static RoofFunction piecewise(std::vector<double> edges, std::vector<double> values);

  double eval(double x) const;
  double infValue() const;  // certified lower bound
  double supValue() const;  // certified upper bound
};

// integer homology class attached to each return, constant on cells
struct PiecewiseClass {
  std::vector<double> cellEdges;  // ascending, first 0, last 1
  std::vector<IVec> cellValues;   // one per cell, common dimension

  IVec eval(double x) const;
  int dim() const;
};

// linear-flow model of the suspension on T^2: the transversal is the circle
// {x_1 = 0}, the leaf through (0, x) flows with the stored direction
struct TorusFlowRealization {
  double alpha = 0.0;
  bool arcLength = false;
  Vec direction;  // (1, alpha), normalized when arcLength
};

struct SuspensionSolenoid {
  TransversalSystem base;
  RoofFunction roof;  // 0 < inf <= sup < infinity
  PiecewiseClass phi;
  std::optional<TorusFlowRealization> realization;
  std::vector<std::string> notes;
};

void validate_solenoid(const SuspensionSolenoid& sol);

struct BirkhoffResult {
  double value = 0.0;
  double tail = 0.0;  // max drift of the two trailing dyadic block averages
  long long steps = 0;
};

BirkhoffResult birkhoff_average(const TransversalSystem& sys,
                                const std::function<double(double)>& w, double x0,
                                long long steps);

// exact integrals against the base measure: Lebesgue kills nonzero trig
// frequencies, the discrete spaces sum their states, cells use exact measure
double exact_roof_integral(const TransversalSystem& sys, const RoofFunction& roof);
Vec exact_class_integral(const TransversalSystem& sys, const PiecewiseClass& phi);

// numerator and denominator of the Ruelle-Sullivan quotient, kept separate
// so linearity in the measure and scale cancellation stay observable
struct MeasuredParts {
  Vec phiIntegral;          // int phi dmu, exact cell sums
  double roofIntegral = 0;  // int roof dmu, exact
};

MeasuredParts ruelle_sullivan_parts(const SuspensionSolenoid& sol);
Vec ruelle_sullivan_class(const SuspensionSolenoid& sol);

struct LeafClassResult {
  AsymptoticEstimate symbolic;  // Birkhoff quotient sum(phi)/sum(roof)
  // crossing-route recomputation on the realized linear flow when present
  std::optional<AsymptoticEstimate> geometric;
};

// class of the leaf through x0 after `steps` returns; stabilization is
// judged on the quotients at steps/4, steps/2 and steps
LeafClassResult leaf_schwartzman_class(const SuspensionSolenoid& sol, double x0,
                                       long long steps, double tol);

// suspension of the rotation by alpha with unit roof (arc-length roof
// sqrt(1+alpha^2) on request) and the standard wrap-cell class (1,1) on
// [1-alpha, 1), (1,0) elsewhere; carries the torus realization and a note
// when alpha is within 1e-9 of p/q for some q <= 1e5
SuspensionSolenoid realize_as_torus_flow(double alpha, bool arcLength = false);

// the leaf through (0, seed) of the realized flow; requires a realization
LiftedCurve realized_leaf_curve(const SuspensionSolenoid& sol, double seed);

struct EmpiricalMeasure {
  std::vector<double> x;      // visited points
  std::vector<double> w;      // roof-weighted visit mass, normalized to sum 1
  double distance = 0.0;      // max defect over the 64 dyadic test intervals
};

EmpiricalMeasure empirical_transversal_measure(const SuspensionSolenoid& sol,
                                               double seed, long long steps);

// boundary-to-bulk volume ratio of the leaf ball B(y0, r) in the slab
// decomposition: the (at most two) straddling slabs against the fully
// contained ones, one ratio per radius. Exactly 0 once a periodic leaf is
// fully covered; +infinity while no slab fits.
std::vector<double> controlled_growth_ratio(const SuspensionSolenoid& sol, double seed,
                                            const std::vector<double>& radii);

}  // namespace acyc

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "acyc/common.hpp"
#include "acyc/solenoid.hpp"

// k-solenoids with trapped transversal geometry. A slab is the leaf piece
// between consecutive transversal fibers; each slab carries its k-volume, an
// integer k-class, and two metric roofs (least crossing cost, largest
// diameter) whose extremes are the exhaustion constants. Only the T^3
// family is meshed geometrically; everything else stays symbolic.

namespace acyc {

// immersed slab family in T^3 over a circle rotation: base circle in
// coordinate 1, suspension direction in coordinate 2, the free leaf circle
// in coordinate 3. The slab over x sweeps base from x to x + Delta(x) with
// Delta = (short return increment) + (wrap-cell indicator), so the closed-up
// slab class is (1, wrap indicator, 0) in the fixed H_2 basis.
struct T3Immersion {
  double alpha = 0.0;
  double wrapLo = 0.0, wrapHi = 0.0;  // wrap cell [wrapLo, wrapHi)
  bool unitVolume = false;            // report slab volumes as 1, not areas
};

struct TrappingSolenoid {
  TransversalSystem base;
  RoofFunction slabVolume;   // Vol_k of the slab over x
  PiecewiseClass slabClass;  // closed-up slab class in the fixed basis
  RoofFunction separation;   // least within-slab distance between its fibers
  RoofFunction diameter;     // largest within-slab distance, >= separation
  double epsilon0 = 0.25;    // collar half-width of the trapping region
  double c0 = 0, c1 = 0, c2 = 0;  // inf separation, sup diameter, sup volume
  std::optional<T3Immersion> t3;
  std::vector<std::string> notes;
};

void validate_trapping(const TrappingSolenoid& sol);

// fill any zero constant from the declared roofs
void measure_constants(TrappingSolenoid& sol);

// exact integer sum of slab classes over slab indices [a, b); negative
// indices walk the inverse orbit
IVec slab_sum_class(const TrappingSolenoid& sol, double x0, long long a, long long b);

// Ruelle-Sullivan data of the trapping solenoid: exact class and volume
// integrals against the base measure, and their quotient
MeasuredParts ruelle_sullivan_parts(const TrappingSolenoid& sol);
Vec ruelle_sullivan_class(const TrappingSolenoid& sol);

struct KWindow {
  long long a = 0, b = 1;  // slab index window, a <= 0 < b
};

struct KClassResult {
  AsymptoticEstimate estimate;  // [N_{a,b}] / Vol over the window ladder
  double lastVolume = 0.0;
  double capShare = 0.0;        // capVolume / lastVolume
};

// class-per-volume quotients over widening windows, judged on the last
// three; capVolume models the closing correction added to each denominator
KClassResult k_schwartzman_class(const TrappingSolenoid& sol, double x0,
                                 const std::vector<KWindow>& windows, double tol,
                                 double capVolume = 0.0);

struct ExhaustionRow {
  double radius = 0.0;
  long long aInner = 0, bInner = 0;  // largest slab window inside B(y0, r)
  long long aOuter = 0, bOuter = 0;  // smallest slab window containing it
  double innerVolume = 0.0;
  double defectVolume = 0.0;         // volume of the outer minus inner slabs
  double ratio = 0.0;                // defectVolume / innerVolume
  bool withinBound = false;          // both one-sided gaps < c1/c0 + 2
};

struct ExhaustionReport {
  double bound = 0.0;  // c1/c0 + 2
  std::vector<ExhaustionRow> rows;
  bool allWithinBound = false;
  bool adjacencyPathOk = false;  // consecutive slabs share exactly one fiber
};

// ball exhaustion audit in the slab-chain metric: fibers sit at cumulative
// separation cost, a slab lies inside the ball when its chain distance plus
// its diameter fits, and the ball cannot reach past a fiber once the
// cumulative cost exceeds the radius
ExhaustionReport exhaustion_control_check(const TrappingSolenoid& sol, double x0,
                                          const std::vector<double>& radii);

TrappingSolenoid t3_trapping_solenoid(double alpha, double wrapLo, double wrapHi,
                                      bool unitVolume = false);

// slab class recomputed from the immersed closed-up slab by signed crossing
// counts against generic level lines; throws StructuralError when it
// disagrees with the declared class table
IVec t3_geometric_class(const TrappingSolenoid& sol, double x);

}  // namespace acyc

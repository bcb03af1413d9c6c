#pragma once

#include <string>
#include <utility>
#include <vector>

#include "acyc/common.hpp"
#include "acyc/geometry.hpp"

// Minimal loop length per integral class and the stable norm
// ||a|| = lim l(n a)/n. Flat metrics are closed-form; conformal metrics get
// certified upper bounds from shortest paths on a lifted grid and lower
// bounds from the comparison flat metric e^{2 min u} G.

namespace acyc {

enum class LoopMethod { flatExact, gridDijkstra };

struct LoopLengthResult {
  double value = 0.0;  // l(a) for flatExact, an upper bound on l(a) otherwise
  LoopMethod method = LoopMethod::flatExact;
  int resolution = 0;   // grid cells per unit edge (grid method only)
  double upperBound = 0.0;
  double lowerBound = 0.0;  // comparison-metric certificate; == value when exact
  std::vector<Vec> loop;    // lifted minimizing polyline, basepoint to basepoint + a
};

// Shortest closed loop in class a. Flat: straight lattice geodesic of
// length sqrt(a^T G a). Conformal: min over basepoints on the quarter-period
// subgrid of the Dijkstra distance from the basepoint to its a-translate in
// the lifted grid graph (all 3^n - 1 cell moves, midpoint edge weights),
// tightened by one local polyline-relaxation pass and re-measured with fine
// quadrature.
LoopLengthResult minimal_loop_length(const TorusGeometry& geom, const IVec& a,
                                     int resolution = 16);

struct StableNormEstimate {
  double value = 0.0;       // running min of l(n a)/n, a certified upper bound
  double lowerBound = 0.0;  // e^{min u} sqrt(a^T G a), positive for a != 0
  std::vector<double> upperBounds;  // subadditive ladder (l(n a) + C0)/n
  int nUsed = 0;
  double C0 = 0.0;  // twice the certified torus diameter
};

// Fekete estimate of ||a|| over n = 1..nMax. l(n a)/n dominates ||a|| for
// every n, so the running min is itself certified; the C0 ladder is the
// subadditive sequence whose limit the norm is.
StableNormEstimate stable_norm(const TorusGeometry& geom, const IVec& a, int nMax,
                               int resolution = 16);

struct SubadditivityRow {
  IVec a, b;
  double la = 0.0, lb = 0.0, lab = 0.0;  // l(a), l(b), l(a+b)
  double l3a = 0.0;                      // l(3 a)
  bool trianglePass = false;             // l(a+b) <= l(a) + l(b) + C0 + slack
  bool multiplePass = false;             // l(3 a) <= 3 l(a) + slack
};

struct SubadditivityReport {
  double c0 = 0.0;
  double slack = 0.0;  // twice the metric diagonal of one grid cell
  std::vector<SubadditivityRow> rows;
  std::vector<std::string> violations;
  bool allPassed = true;
};

SubadditivityReport subadditivity_audit(const TorusGeometry& geom,
                                        const std::vector<std::pair<IVec, IVec>>& pairs,
                                        int resolution);

}  // namespace acyc

#pragma once

#include "acyc/common.hpp"

// Flat tori R^n/Z^n with a Gram-matrix metric and an optional conformal
// factor e^{2u}, u a trigonometric polynomial with integer frequencies
// (hence Z^n-periodic by construction). The deck group is Z^n and the
// homology representation rho is the identity in the fixed basis, so lift
// displacements ARE homology coordinates.

namespace acyc {

struct ConformalTerm {
  Eigen::VectorXi freq;  // k in Z^n
  double amp = 0.0;      // contributes amp * cos(2*pi*<k,x>)
};

class TorusGeometry {
 public:
  // Flat metric: gram must be symmetric positive definite.
  TorusGeometry(Mat gram, std::vector<ConformalTerm> conformal = {});
  static TorusGeometry unitFlat(int dim);

  int dim() const { return dim_; }
  const Mat& gram() const { return gram_; }
  const std::vector<ConformalTerm>& conformal() const { return conformal_; }
  bool isFlat() const { return conformal_.empty(); }

  double u(const Vec& x) const;                // conformal exponent
  double conformalFactor(const Vec& x) const;  // e^{u(x)}

  double flatNorm(const Vec& v) const;  // sqrt(v^T G v)

 private:
  int dim_;
  Mat gram_;
  std::vector<ConformalTerm> conformal_;
};

// Coordinatewise reduction mod 1 into [0,1)^n.
Vec project(const Vec& lift);

struct ClosingPath {
  Vec displacement;   // q - p + m in R^n; adding it to any lift of p lands on a lift of q
  double flatLength;  // gram length of the straight segment
  double length;      // metric length (= flatLength when flat)
  std::vector<Vec> polyline() const { return {start, start + displacement}; }
  Vec start;          // canonical lift of p in [0,1)^n
};

// Straight segment minimizing gram length over the 3^n nearest lattice
// translates of q. Under a conformal factor the same segment is kept (the
// closing family only needs uniformly bounded length) and its perturbed
// length is reported. Ties break lexicographically on the translate.
ClosingPath shortest_closing(const TorusGeometry& geom, const Vec& p, const Vec& q);

// Alternative admissible closing used for closing-independence audits:
// the fixed-chart segment q - p with no lattice translate. Bounded by one
// cell diagonal, which is all the asymptotic theory requires.
ClosingPath chart_closing(const TorusGeometry& geom, const Vec& p, const Vec& q);

// Length of a polyline of lift points. Flat part is exact; the conformal
// factor is integrated per segment by the composite midpoint rule with
// panels of metric size <= quadratureStep.
double path_length(const TorusGeometry& geom, const std::vector<Vec>& polyline,
                   double quadratureStep = 1e-3);

struct DiameterInfo {
  double flat;      // diameter of the flat torus (exact for diagonal gram)
  double upper;     // certified upper bound for the conformal metric
  double c0() const { return 2.0 * upper; }  // loop-closing constant
};

// Flat diameter: closed form (half the gram-diagonal norm) for diagonal
// gram; general gram via grid search with local refinement (dim <= 3).
// Conformal upper bound: flat diameter * e^{sum |amp|}, certified since
// u <= sum |amp| pointwise.
DiameterInfo torus_diameter(const TorusGeometry& geom);

}  // namespace acyc

#pragma once

#include <optional>
#include <utility>

#include "acyc/common.hpp"

// Set-geometry over homology vectors: linear combinations, additive hulls
// A +^ B = { a + b }, convex-hull membership with distance, and projective
// ray clustering for unparametrized (cone) limits.

namespace acyc {

// Fixed-order linear combination. The sum is folded strictly left to right
// so identical term lists reproduce bit-identical results.
Vec combine(const std::vector<std::pair<double, Vec>>& terms);

// Evenly spaced samples of every segment [a,b], a in A, b in B.
// samplesPerSegment >= 2; endpoints are included exactly, so the output
// contains A and B verbatim.
PointSet additive_hull_sample(const PointSet& A, const PointSet& B,
                              int samplesPerSegment);

struct HullResult {
  bool inside;      // distance <= tol
  double distance;  // Euclidean distance to conv(S)
};

// Distance from p to the convex hull of S.
// rank 1: interval; rank 2: exact polygon distance (monotone chain).
// rank >= 3: Wolfe min-norm-point iteration with a fixed budget; exact on
// termination, which the budget comfortably reaches at desk scale.
HullResult hull_membership(const Vec& p, const PointSet& S, double tol);

struct ConeResult {
  std::vector<Vec> rays;   // unit directions, lexicographically sorted
  int zeroCount = 0;       // points under the zero threshold, reported apart
};

// Clusters projective directions of the nonzero points of S into rays.
// Two points share a ray when their directions differ by <= angularTol
// radians from the ray representative. zeroTol is relative to the largest
// point norm in S.
ConeResult cone_from_samples(const PointSet& S, double angularTol,
                             double zeroTol = 1e-9);

// Euclidean distance from p to the closed segment [a, b].
double distance_to_segment(const Vec& p, const Vec& a, const Vec& b);

}  // namespace acyc

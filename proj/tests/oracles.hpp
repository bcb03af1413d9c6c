#pragma once

// Independent oracles used to derive expected values. These deliberately
// avoid the library's own code paths: brute-force enumeration, Richardson
// extrapolation, and closed-form counting arguments only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "acyc/common.hpp"
#include "acyc/geometry.hpp"

namespace oracle {

using acyc::Mat;
using acyc::Vec;

// Min gram length of q - p + m over all integer translates m in [-range,range]^n.
inline double closingBruteForce(const Mat& G, const Vec& p, const Vec& q, int range = 2) {
  const int n = static_cast<int>(p.size());
  Eigen::VectorXi m = Eigen::VectorXi::Constant(n, -range);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    Vec d = q - p;
    for (int i = 0; i < n; ++i) d[i] += m[i];
    best = std::min(best, std::sqrt(d.dot(G * d)));
    int i = n - 1;
    while (i >= 0 && m[i] == range) m[i--] = -range;
    if (i < 0) break;
    ++m[i];
  }
  return best;
}

// Conformal length of the straight segment [a,b]: composite midpoint rule at
// N and 2N panels, Richardson-extrapolated (midpoint error is O(1/N^2)).
inline double segmentLengthRichardson(const acyc::TorusGeometry& geom, const Vec& a,
                                      const Vec& b, int N = 4096) {
  auto mid = [&](int panels) {
    double s = 0.0;
    for (int j = 0; j < panels; ++j) {
      const double t = (j + 0.5) / panels;
      s += geom.conformalFactor(Vec(a + t * (b - a)));
    }
    return geom.flatNorm(Vec(b - a)) * s / panels;
  };
  const double iN = mid(N), i2N = mid(2 * N);
  return (4.0 * i2N - iN) / 3.0;
}

inline double pointSegDist(const Vec& p, const Vec& a, const Vec& b) {
  const Vec d = b - a;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / dd, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

// Distance from p to conv(pts) in the plane, by exhaustive triangles and
// edges. O(m^3) but independent of any hull construction.
inline double hullDist2dBruteForce(const Vec& p, const std::vector<Vec>& pts) {
  auto sgn = [](double x) { return (x > 0) - (x < 0); };
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const Vec &A = pts[i], &B = pts[j], &C = pts[k];
        auto cr = [](const Vec& o, const Vec& x, const Vec& y) {
          return (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0]);
        };
        const int s1 = sgn(cr(A, B, p)), s2 = sgn(cr(B, C, p)), s3 = sgn(cr(C, A, p));
        if ((s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0))
          return 0.0;  // inside (or on) some triangle
      }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    best = std::min(best, (p - pts[i]).norm());
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::min(best, pointSegDist(p, pts[i], pts[j]));
  }
  return best;
}

// Distance from p to the additive-hull segment family { [a,b] : a in A, b in B }.
inline double additiveHullDist(const Vec& p, const std::vector<Vec>& A,
                               const std::vector<Vec>& B) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& a : A)
    for (const Vec& b : B) best = std::min(best, pointSegDist(p, a, b));
  return best;
}

// Exact visit count of the rotation orbit x0 + i*alpha (mod 1), i < N, to the
// interval [1-alpha, 1): visits happen exactly when floor crosses, so the
// count telescopes to floor(x0 + N*alpha) - floor(x0).
inline long rotationVisitsTopCell(double x0, double alpha, long N) {
  return static_cast<long>(std::floor(x0 + N * alpha)) -
         static_cast<long>(std::floor(x0));
}

// Signed crossings of the affine function f(u) = a + b*u with Z + offset on
// [s, t]: closed-form floor count, each crossing signed by sign(b).
inline long affineIntegerCrossings(double a, double b, double offset, double s, double t) {
  const double fs = a + b * s - offset, ft = a + b * t - offset;
  const long below = static_cast<long>(std::floor(fs));
  const long at = static_cast<long>(std::floor(ft));
  return at - below;  // net signed crossings
}

// Star discrepancy of points in [0,1): sup over intervals [0,x) of
// |empirical - x|, computed by the standard sorted formula.
inline double starDiscrepancy(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::abs((i + 1) / n - xs[i]));
    d = std::max(d, std::abs(xs[i] - i / n));
  }
  return d;
}

}  // namespace oracle

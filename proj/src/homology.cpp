#include "acyc/homology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acyc {

Vec combine(const std::vector<std::pair<double, Vec>>& terms) {
  if (terms.empty()) throw DomainError("combine: empty term list");
  const Eigen::Index rank = terms.front().second.size();
  Vec acc = Vec::Zero(rank);
  for (const auto& [c, v] : terms) {
    if (v.size() != rank) throw StructuralError("combine: rank mismatch");
    // strict left fold, term by term, coordinate order fixed
    for (Eigen::Index i = 0; i < rank; ++i) acc[i] += c * v[i];
  }
  return acc;
}

PointSet additive_hull_sample(const PointSet& A, const PointSet& B,
                              int samplesPerSegment) {
  if (A.empty() || B.empty())
    throw DomainError("additive_hull_sample: empty input set");
  if (A.rank() != B.rank())
    throw StructuralError("additive_hull_sample: rank mismatch");
  if (samplesPerSegment < 2)
    throw DomainError("additive_hull_sample: need >= 2 samples per segment");
  PointSet out;
  for (const Vec& a : A.points)
    for (const Vec& b : B.points)
      for (int j = 0; j < samplesPerSegment; ++j) {
        const double t = double(j) / double(samplesPerSegment - 1);
        // endpoints exact: t=0 gives a, t=1 gives b
        out.add(t == 0.0 ? a : (t == 1.0 ? b : Vec(((1.0 - t) * a + t * b).eval())));
      }
  return out;
}

namespace {

double pointSegmentDistance(const Vec& p, const Vec& a, const Vec& b) {
  const Vec d = b - a;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / dd, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

// Exact 1-d case: hull is an interval.
double distRank1(const Vec& p, const std::vector<Vec>& pts) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec& q : pts) {
    lo = std::min(lo, q[0]);
    hi = std::max(hi, q[0]);
  }
  if (p[0] < lo) return lo - p[0];
  if (p[0] > hi) return p[0] - hi;
  return 0.0;
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain; returns hull vertices counter-clockwise.
std::vector<Vec> convexHull2(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec& a, const Vec& b) {
                          return a[0] == b[0] && a[1] == b[1];
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Vec> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double distRank2(const Vec& p, const std::vector<Vec>& pts) {
  const std::vector<Vec> hull = convexHull2(pts);
  if (hull.size() == 1) return (p - hull[0]).norm();
  if (hull.size() == 2) return pointSegmentDistance(p, hull[0], hull[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec& a = hull[i];
    const Vec& b = hull[(i + 1) % hull.size()];
    if (cross2(a, b, p) < 0) inside = false;
    best = std::min(best, pointSegmentDistance(p, a, b));
  }
  return inside ? 0.0 : best;
}

// Wolfe's minimum-norm-point algorithm for dist(p, conv(S)), rank >= 3.
// Finite in exact arithmetic; the iteration budget is generous for the
// point counts that reach here.
double distWolfe(const Vec& p, const std::vector<Vec>& ptsIn) {
  std::vector<Vec> pts;
  pts.reserve(ptsIn.size());
  for (const Vec& q : ptsIn) pts.push_back(q - p);  // solve min-norm over shifted hull

  auto support = [&](const Vec& d) {
    std::size_t best = 0;
    double bv = pts[0].dot(d);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double v = pts[i].dot(d);
      if (v < bv) {
        bv = v;
        best = i;
      }
    }
    return best;
  };

  std::vector<std::size_t> corral{support(Vec::Zero(p.size()).eval())};
  // start from the min-norm vertex
  {
    std::size_t best = 0;
    double bn = pts[0].squaredNorm();
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].squaredNorm() < bn) {
        bn = pts[i].squaredNorm();
        best = i;
      }
    corral = {best};
  }
  std::vector<double> lambda{1.0};
  Vec x = pts[corral[0]];

  const int budget = 200;
  for (int iter = 0; iter < budget; ++iter) {
    const std::size_t j = support(x);
    const double gap = x.squaredNorm() - x.dot(pts[j]);
    if (gap <= 1e-14 * std::max(1.0, x.squaredNorm())) break;
    if (std::find(corral.begin(), corral.end(), j) == corral.end()) {
      corral.push_back(j);
      lambda.push_back(0.0);
    }
    // minor cycle: project onto affine hull of the corral, shrink to stay convex
    for (;;) {
      const std::size_t m = corral.size();
      // solve for affine weights minimizing |sum w_i v_i| with sum w = 1
      Mat A(m + 1, m + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
          A(r, c) = pts[corral[r]].dot(pts[corral[c]]);
      for (std::size_t r = 0; r < m; ++r) {
        A(r, m) = 1.0;
        A(m, r) = 1.0;
      }
      A(m, m) = 0.0;
      rhs[m] = 1.0;
      Eigen::VectorXd w = A.fullPivLu().solve(rhs).head(m);

      bool ok = true;
      for (std::size_t i = 0; i < m; ++i)
        if (w[i] < 1e-12) ok = false;
      if (ok) {
        lambda.assign(w.data(), w.data() + m);
        break;
      }
      // step toward w until the first coordinate hits zero, then drop it
      double theta = 1.0;
      for (std::size_t i = 0; i < m; ++i)
        if (w[i] < lambda[i])
          theta = std::min(theta, lambda[i] / (lambda[i] - w[i]));
      std::vector<std::size_t> nc;
      std::vector<double> nl;
      for (std::size_t i = 0; i < m; ++i) {
        const double li = (1 - theta) * lambda[i] + theta * w[i];
        if (li > 1e-12) {
          nc.push_back(corral[i]);
          nl.push_back(li);
        }
      }
      corral.swap(nc);
      lambda.swap(nl);
      if (corral.size() == m) break;  // no progress; accept current point
    }
    x = Vec::Zero(p.size());
    for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * pts[corral[i]];
  }
  return x.norm();
}

}  // namespace

HullResult hull_membership(const Vec& p, const PointSet& S, double tol) {
  if (S.empty()) throw DomainError("hull_membership: empty set");
  if (p.size() != S.rank()) throw StructuralError("hull_membership: rank mismatch");
  double d;
  switch (S.rank()) {
    case 1: d = distRank1(p, S.points); break;
    case 2: d = distRank2(p, S.points); break;
    default: d = distWolfe(p, S.points); break;
  }
  return HullResult{d <= tol, d};
}

ConeResult cone_from_samples(const PointSet& S, double angularTol, double zeroTol) {
  if (S.empty()) throw DomainError("cone_from_samples: empty set");
  double maxNorm = 0.0;
  for (const Vec& q : S.points) maxNorm = std::max(maxNorm, q.norm());

  ConeResult out;
  if (maxNorm == 0.0) {
    out.zeroCount = static_cast<int>(S.size());
    return out;
  }
  const double cut = zeroTol * maxNorm;

  std::vector<Vec> sums;  // unnormalized ray accumulators
  for (const Vec& q : S.points) {
    const double n = q.norm();
    if (n <= cut) {
      ++out.zeroCount;
      continue;
    }
    const Vec u = q / n;
    bool merged = false;
    for (Vec& s : sums) {
      const Vec r = s.normalized();
      const double c = std::clamp(r.dot(u), -1.0, 1.0);
      if (std::acos(c) <= angularTol) {
        s += u;
        merged = true;
        break;
      }
    }
    if (!merged) sums.push_back(u);
  }
  for (const Vec& s : sums) out.rays.push_back(s.normalized());
  std::sort(out.rays.begin(), out.rays.end(), [](const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  });
  return out;
}

double distance_to_segment(const Vec& p, const Vec& a, const Vec& b) {
  return pointSegmentDistance(p, a, b);
}

}  // namespace acyc

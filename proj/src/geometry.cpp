#include "acyc/geometry.hpp"

#include <cmath>
#include <numbers>

namespace acyc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TorusGeometry::TorusGeometry(Mat gram, std::vector<ConformalTerm> conformal)
    : dim_(static_cast<int>(gram.rows())),
      gram_(std::move(gram)),
      conformal_(std::move(conformal)) {
  if (gram_.rows() != gram_.cols() || dim_ < 1)
    throw StructuralError("TorusGeometry: gram must be square, dim >= 1");
  if (!gram_.isApprox(gram_.transpose(), 1e-12))
    throw StructuralError("TorusGeometry: gram must be symmetric");
  Eigen::LLT<Mat> llt(gram_);
  if (llt.info() != Eigen::Success)
    throw StructuralError("TorusGeometry: gram must be positive definite");
  for (const auto& term : conformal_) {
    if (term.freq.size() != dim_)
      throw StructuralError("TorusGeometry: conformal frequency dim mismatch");
    if (!std::isfinite(term.amp))
      throw StructuralError("TorusGeometry: conformal amplitude not finite");
  }
}

TorusGeometry TorusGeometry::unitFlat(int dim) {
  return TorusGeometry(Mat::Identity(dim, dim));
}

double TorusGeometry::u(const Vec& x) const {
  double s = 0.0;
  for (const auto& term : conformal_) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += term.freq[i] * x[i];
    s += term.amp * std::cos(kTwoPi * phase);
  }
  return s;
}

double TorusGeometry::conformalFactor(const Vec& x) const { return std::exp(u(x)); }

double TorusGeometry::flatNorm(const Vec& v) const {
  return std::sqrt(v.dot(gram_ * v));
}

Vec project(const Vec& lift) {
  Vec p(lift.size());
  for (Eigen::Index i = 0; i < lift.size(); ++i) {
    if (!std::isfinite(lift[i])) throw DomainError("project: non-finite coordinate");
    double f = lift[i] - std::floor(lift[i]);
    if (f >= 1.0) f = 0.0;  // guard against rounding at the seam
    p[i] = f;
  }
  return p;
}

namespace {

ClosingPath makeClosing(const TorusGeometry& geom, const Vec& p, const Vec& d) {
  ClosingPath c;
  c.start = p;
  c.displacement = d;
  c.flatLength = geom.flatNorm(d);
  c.length = geom.isFlat() ? c.flatLength : path_length(geom, {p, p + d});
  return c;
}

}  // namespace

ClosingPath shortest_closing(const TorusGeometry& geom, const Vec& p, const Vec& q) {
  const int n = geom.dim();
  if (p.size() != n || q.size() != n)
    throw StructuralError("shortest_closing: dimension mismatch");
  const Vec base = q - p;

  Vec bestD;
  double bestLen = -1.0;
  Eigen::VectorXi m = Eigen::VectorXi::Constant(n, -1);
  for (;;) {
    Vec d = base;
    for (int i = 0; i < n; ++i) d[i] += m[i];
    const double len = geom.flatNorm(d);
    // strict < keeps the first (lexicographically smallest) translate on ties
    if (bestLen < 0.0 || len < bestLen - 1e-15) {
      bestLen = len;
      bestD = d;
    }
    int i = n - 1;
    while (i >= 0 && m[i] == 1) m[i--] = -1;
    if (i < 0) break;
    ++m[i];
  }
  return makeClosing(geom, project(p), bestD);
}

ClosingPath chart_closing(const TorusGeometry& geom, const Vec& p, const Vec& q) {
  if (p.size() != geom.dim() || q.size() != geom.dim())
    throw StructuralError("chart_closing: dimension mismatch");
  const Vec pp = project(p), qq = project(q);
  return makeClosing(geom, pp, Vec(qq - pp));
}

double path_length(const TorusGeometry& geom, const std::vector<Vec>& polyline,
                   double quadratureStep) {
  if (polyline.size() < 2) throw DomainError("path_length: need >= 2 points");
  if (quadratureStep <= 0.0) throw DomainError("path_length: bad quadrature step");
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < polyline.size(); ++s) {
    const Vec& a = polyline[s];
    const Vec& b = polyline[s + 1];
    const double flat = geom.flatNorm(Vec(b - a));
    if (geom.isFlat() || flat == 0.0) {
      total += flat;
      continue;
    }
    const int panels = std::max<int>(1, static_cast<int>(std::ceil(flat / quadratureStep)));
    double factor = 0.0;  // midpoint-rule average of e^u along the segment
    for (int j = 0; j < panels; ++j) {
      const double t = (j + 0.5) / panels;
      factor += geom.conformalFactor(Vec(a + t * (b - a)));
    }
    total += flat * factor / panels;
  }
  return total;
}

DiameterInfo torus_diameter(const TorusGeometry& geom) {
  const int n = geom.dim();
  const Mat& G = geom.gram();

  bool diagonal = true;
  for (int i = 0; i < n && diagonal; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && G(i, j) != 0.0) {
        diagonal = false;
        break;
      }

  double flat;
  if (diagonal) {
    flat = 0.5 * std::sqrt(G.diagonal().sum());
  } else {
    if (n > 3)
      throw DomainError("torus_diameter: non-diagonal gram limited to dim <= 3");
    // covering radius by grid search + local refinement
    auto distToLattice = [&](const Vec& x) {
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXi m = Eigen::VectorXi::Constant(n, -2);
      for (;;) {
        Vec d = x;
        for (int i = 0; i < n; ++i) d[i] -= m[i];
        best = std::min(best, geom.flatNorm(d));
        int i = n - 1;
        while (i >= 0 && m[i] == 2) m[i--] = -2;
        if (i < 0) break;
        ++m[i];
      }
      return best;
    };
    const int grid = (n == 2) ? 96 : 32;
    Vec bestX = Vec::Zero(n);
    flat = 0.0;
    Eigen::VectorXi idx = Eigen::VectorXi::Zero(n);
    for (;;) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = (idx[i] + 0.5) / grid;
      const double d = distToLattice(x);
      if (d > flat) {
        flat = d;
        bestX = x;
      }
      int i = n - 1;
      while (i >= 0 && idx[i] == grid - 1) idx[i--] = 0;
      if (i < 0) break;
      ++idx[i];
    }
    // shrinking-box refinement; the objective is a max of min-of-quadratics,
    // so plain descent can stall on ridges while box search cannot
    double h = 1.0 / grid;
    for (int level = 0; level < 30; ++level) {
      Vec center = bestX;
      Eigen::VectorXi off = Eigen::VectorXi::Constant(n, -2);
      for (;;) {
        Vec x = center;
        for (int i = 0; i < n; ++i) x[i] += off[i] * h / 2.0;
        const double d = distToLattice(x);
        if (d > flat) {
          flat = d;
          bestX = x;
        }
        int i = n - 1;
        while (i >= 0 && off[i] == 2) off[i--] = -2;
        if (i < 0) break;
        ++off[i];
      }
      h *= 0.5;
    }
  }

  double ampSum = 0.0;
  for (const auto& term : geom.conformal()) ampSum += std::abs(term.amp);
  return DiameterInfo{flat, flat * std::exp(ampSum)};
}

}  // namespace acyc

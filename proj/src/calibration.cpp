#include "acyc/calibration.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace acyc {

namespace {

double bump1d(const BumpSpec& spec, double x) {
  double r = spec.radius;
  double a = std::abs(x);
  if (a >= r) return 0.0;
  if (spec.name == "tent") return 1.0 - a / r;
  // cos2
  double c = std::cos(0.5 * std::numbers::pi * x / r);
  return c * c;
}

double bumpProduct(const BumpSpec& spec, const Vec& x) {
  double v = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    v *= bump1d(spec, x[i]);
    if (v == 0.0) return 0.0;
  }
  return v;
}

// denominator of the partition of unity at x; factorizes over coordinates
double denominator(const BumpSpec& spec, const Vec& x) {
  double den = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    double s = 0.0;
    long lo = static_cast<long>(std::ceil(x[i] - spec.radius));
    long hi = static_cast<long>(std::floor(x[i] + spec.radius));
    for (long g = lo; g <= hi; ++g) s += bump1d(spec, x[i] - static_cast<double>(g));
    den *= s;
  }
  return den;
}

void validateBump(int dim, const BumpSpec& spec) {
  if (spec.name != "tent" && spec.name != "cos2")
    throw StructuralError("Calibrator: unknown bump '" + spec.name + "'");
  if (spec.name == "tent" && !(spec.radius > 0.5 && spec.radius <= 1.0))
    throw StructuralError("Calibrator: tent radius must lie in (1/2, 1]");
  if (spec.name == "cos2" && spec.radius != 1.0)
    throw StructuralError("Calibrator: cos2 bump has fixed radius 1");
  // covering check on a grid over one fundamental cell
  int grid = dim >= 3 ? 24 : 64;
  Vec x(dim);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    for (int i = 0; i < dim; ++i) x[i] = (idx[static_cast<std::size_t>(i)] + 0.5) / grid;
    if (denominator(spec, x) < 1e-7)
      throw StructuralError("Calibrator: bump translates fail to cover the torus");
    int i = 0;
    for (; i < dim; ++i) {
      if (++idx[static_cast<std::size_t>(i)] < grid) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i == dim) break;
  }
}

}  // namespace

Vec Calibrator::rawValue(const Vec& lift) const {
  if (lift.size() != dim_) throw StructuralError("Calibrator: dimension mismatch");
  if (kind_ == Kind::identity) return lift;
  double den = denominator(bump_, lift);
  if (den < 1e-9) throw NumericalError("Calibrator: partition denominator underflow");
  Vec num = Vec::Zero(dim_);
  std::vector<long> lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    lo[static_cast<std::size_t>(i)] = static_cast<long>(std::ceil(lift[i] - bump_.radius));
    hi[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(lift[i] + bump_.radius));
  }
  std::vector<long> g(lo);
  while (true) {
    Vec shift(dim_);
    for (int i = 0; i < dim_; ++i) shift[i] = static_cast<double>(g[static_cast<std::size_t>(i)]);
    double w = bumpProduct(bump_, lift - shift);
    if (w != 0.0) num += w * shift;
    int i = 0;
    for (; i < dim_; ++i) {
      if (++g[static_cast<std::size_t>(i)] <= hi[static_cast<std::size_t>(i)]) break;
      g[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
    }
    if (i == dim_) break;
  }
  return num / den;
}

Vec Calibrator::value(const Vec& lift) const {
  if (kind_ == Kind::identity) {
    if (lift.size() != dim_) throw StructuralError("Calibrator: dimension mismatch");
    return lift - basepoint_;
  }
  return rawValue(lift) - baseValue_;
}

Calibrator Calibrator::identity(int dim) {
  if (dim < 1) throw StructuralError("Calibrator: dimension must be positive");
  Calibrator c;
  c.kind_ = Kind::identity;
  c.dim_ = dim;
  c.basepoint_ = Vec::Zero(dim);
  c.baseValue_ = Vec::Zero(dim);
  c.lipschitz_ = 1.0;
  return c;
}

Calibrator Calibrator::partition(int dim, const BumpSpec& bump, const Vec& basepoint) {
  if (dim < 1) throw StructuralError("Calibrator: dimension must be positive");
  if (basepoint.size() != dim) throw StructuralError("Calibrator: basepoint dimension mismatch");
  validateBump(dim, bump);
  Calibrator c;
  c.kind_ = Kind::partition;
  c.dim_ = dim;
  c.bump_ = bump;
  c.basepoint_ = basepoint;
  c.baseValue_ = c.rawValue(basepoint);

  // sampled Lipschitz estimate: max Frobenius norm of the Jacobian over a
  // grid on one cell (the map is lattice-equivariant, so one cell suffices)
  int grid = dim >= 3 ? 12 : 32;
  double h = 1e-5, best = 0.0;
  Vec x(dim);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    for (int i = 0; i < dim; ++i) x[i] = (idx[static_cast<std::size_t>(i)] + 0.5) / grid;
    double fro2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fro2 += ((c.rawValue(xp) - c.rawValue(xm)) / (2 * h)).squaredNorm();
    }
    best = std::max(best, std::sqrt(fro2));
    int i = 0;
    for (; i < dim; ++i) {
      if (++idx[static_cast<std::size_t>(i)] < grid) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i == dim) break;
  }
  c.lipschitz_ = best;
  return c;
}

Vec curve_increment(const Calibrator& phi, const LiftedCurve& curve, double s, double t) {
  if (phi.dim() != curve.dim()) throw StructuralError("curve_increment: dimension mismatch");
  Vec ps = curve.at(s), pt = curve.at(t);
  Vec inc = phi.value(pt) - phi.value(ps);
  // equivariance makes the increment lift-independent; verify on a shifted lift
  Vec g = Vec::Ones(phi.dim());
  Vec inc2 = phi.value(pt + g) - phi.value(ps + g);
  if ((inc - inc2).lpNorm<Eigen::Infinity>() > 1e-9)
    throw NumericalError("curve_increment: shifted-lift cross-check failed");
  return inc;
}

IVec loop_class(const Calibrator& phi, const std::vector<Vec>& loopLift) {
  if (loopLift.size() < 2) throw StructuralError("loop_class: need at least two samples");
  const Vec& first = loopLift.front();
  const Vec& last = loopLift.back();
  if (first.size() != phi.dim() || last.size() != phi.dim())
    throw StructuralError("loop_class: dimension mismatch");
  for (int i = 0; i < first.size(); ++i) {
    double d = last[i] - first[i];
    if (std::abs(d - std::round(d)) > 1e-9)
      throw DomainError("loop_class: endpoints do not close up on the torus");
  }
  Vec inc = phi.value(last) - phi.value(first);
  IVec out(phi.dim());
  for (int i = 0; i < inc.size(); ++i) {
    double r = std::round(inc[i]);
    if (std::abs(inc[i] - r) > 1e-6)
      throw NumericalError("loop_class: increment is not integral");
    out[i] = static_cast<std::int64_t>(r);
  }
  return out;
}

}  // namespace acyc

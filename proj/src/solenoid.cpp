#include "acyc/solenoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "acyc/geometry.hpp"

namespace acyc {
namespace {

double frac(double x) { return x - std::floor(x); }

void checkEdges(const std::vector<double>& edges, std::size_t nValues,
                const char* who) {
  if (edges.size() != nValues + 1 || nValues == 0)
    throw StructuralError(std::string(who) + ": cell edges/values size mismatch");
  if (std::abs(edges.front()) > 1e-12 || std::abs(edges.back() - 1.0) > 1e-12)
    throw StructuralError(std::string(who) + ": cells must cover [0,1]");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (!(edges[i] < edges[i + 1]))
      throw StructuralError(std::string(who) + ": cell edges not increasing");
}

std::size_t cellIndex(const std::vector<double>& edges, double x) {
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::size_t idx = (it == edges.begin()) ? 0 : static_cast<std::size_t>(it - edges.begin() - 1);
  if (idx + 2 > edges.size()) idx = edges.size() - 2;
  return idx;
}

// interval starts before and after the exchange
struct IetLayout {
  std::vector<double> start, exStart;
};

IetLayout ietLayout(const TransversalSystem& sys) {
  const auto& len = sys.ietLengths;
  const auto& perm = sys.ietPerm;
  IetLayout L;
  L.start.resize(len.size());
  L.exStart.resize(len.size());
  double acc = 0;
  for (std::size_t i = 0; i < len.size(); ++i) {
    L.start[i] = acc;
    acc += len[i];
  }
  for (std::size_t i = 0; i < len.size(); ++i) {
    double before = 0;
    for (std::size_t j = 0; j < len.size(); ++j)
      if (perm[j] < perm[i]) before += len[j];
    L.exStart[i] = before;
  }
  return L;
}

void checkPermutation(const std::vector<int>& perm, const char* who) {
  std::vector<char> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(perm.size()) || seen[p])
      throw StructuralError(std::string(who) + ": not a permutation");
    seen[p] = 1;
  }
}

}  // namespace

TransversalSystem TransversalSystem::rotation(double alpha) {
  TransversalSystem s;
  s.space = Space::circle;
  s.alpha = frac(alpha);
  s.ergodic = s.uniquelyErgodic = true;
  return s;
}

TransversalSystem TransversalSystem::goldenRotation() {
  return rotation((std::sqrt(5.0) - 1.0) / 2.0);
}

TransversalSystem TransversalSystem::iet(std::vector<double> lengths,
                                         std::vector<int> perm) {
  TransversalSystem s;
  s.space = Space::iet;
  double total = 0;
  for (double l : lengths) {
    if (!(l > 0)) throw StructuralError("iet: lengths must be positive");
    total += l;
  }
  if (lengths.empty()) throw StructuralError("iet: no intervals");
  for (double& l : lengths) l /= total;
  s.ietLengths = std::move(lengths);
  checkPermutation(perm, "iet");
  if (perm.size() != s.ietLengths.size())
    throw StructuralError("iet: permutation size mismatch");
  s.ietPerm = std::move(perm);
  s.ergodic = s.uniquelyErgodic = true;
  return s;
}

TransversalSystem TransversalSystem::dyadicOdometer(int depth) {
  TransversalSystem s;
  s.space = Space::odometer;
  if (depth < 1 || depth > 22)
    throw DomainError("dyadicOdometer: depth must lie in [1, 22]");
  s.odoDepth = depth;
  s.ergodic = s.uniquelyErgodic = true;
  return s;
}

// two fixed points: the stored measure is a genuine mixture of the two
// ergodic point masses, so the system is invariant but not ergodic
TransversalSystem TransversalSystem::twoAtoms(double w0, double w1) {
  TransversalSystem s;
  s.space = Space::atoms;
  if (!(w0 > 0) || !(w1 > 0))
    throw StructuralError("twoAtoms: weights must be positive");
  s.atomX = {0.25, 0.75};
  s.atomW = {w0 / (w0 + w1), w1 / (w0 + w1)};
  s.atomPerm = {0, 1};
  s.ergodic = false;
  s.uniquelyErgodic = false;
  s.validate();
  return s;
}

TransversalSystem TransversalSystem::atomCycle(std::vector<double> xs,
                                               std::vector<double> ws) {
  TransversalSystem s;
  s.space = Space::atoms;
  if (xs.empty() || xs.size() != ws.size())
    throw StructuralError("atomCycle: points/weights size mismatch");
  double total = 0;
  for (double w : ws) {
    if (!(w > 0)) throw StructuralError("atomCycle: weights must be positive");
    total += w;
  }
  for (double& w : ws) w /= total;
  s.atomX = std::move(xs);
  s.atomW = std::move(ws);
  s.atomPerm.resize(s.atomX.size());
  for (std::size_t i = 0; i < s.atomX.size(); ++i)
    s.atomPerm[i] = static_cast<int>((i + 1) % s.atomX.size());
  // a single cycle carries exactly one invariant probability measure, the
  // uniform one; validate() rejects any other weight profile
  s.ergodic = true;
  s.uniquelyErgodic = true;
  s.validate();
  return s;
}

void TransversalSystem::validate() const {
  switch (space) {
    case Space::circle:
      if (!std::isfinite(alpha)) throw StructuralError("rotation: alpha not finite");
      break;
    case Space::iet: {
      if (ietLengths.empty() || ietLengths.size() != ietPerm.size())
        throw StructuralError("iet: lengths/permutation size mismatch");
      double total = 0;
      for (double l : ietLengths) {
        if (!(l > 0)) throw StructuralError("iet: lengths must be positive");
        total += l;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw StructuralError("iet: lengths must sum to 1");
      checkPermutation(ietPerm, "iet");
      break;
    }
    case Space::odometer:
      if (odoDepth < 1 || odoDepth > 22)
        throw DomainError("odometer: depth must lie in [1, 22]");
      break;
    case Space::atoms: {
      if (atomX.empty() || atomX.size() != atomW.size() ||
          atomX.size() != atomPerm.size())
        throw StructuralError("atoms: field size mismatch");
      double total = 0;
      for (double w : atomW) {
        if (!(w > 0)) throw StructuralError("atoms: weights must be positive");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw StructuralError("atoms: weights must sum to 1");
      checkPermutation(atomPerm, "atoms");
      for (std::size_t i = 0; i < atomX.size(); ++i)
        for (std::size_t j = i + 1; j < atomX.size(); ++j)
          if (std::abs(atomX[i] - atomX[j]) < 1e-9)
            throw StructuralError("atoms: points must be distinct");
      // invariance of the weights under the permutation
      for (std::size_t i = 0; i < atomW.size(); ++i)
        if (std::abs(atomW[atomPerm[i]] - atomW[i]) > 1e-9)
          throw StructuralError("atoms: weights not invariant under the permutation");
      break;
    }
  }
}

namespace {

long long odoState(const TransversalSystem& sys, double x) {
  const long long n = 1LL << sys.odoDepth;
  long long k = std::llround(frac(x) * static_cast<double>(n));
  k %= n;
  if (k < 0) k += n;
  return k;
}

std::size_t atomIndex(const TransversalSystem& sys, double x) {
  for (std::size_t i = 0; i < sys.atomX.size(); ++i)
    if (std::abs(x - sys.atomX[i]) <= 1e-9) return i;
  throw StructuralError("atoms: point is not an atom");
}

}  // namespace

double TransversalSystem::apply(double x) const {
  switch (space) {
    case Space::circle:
      return frac(frac(x) + alpha);
    case Space::iet: {
      auto L = ietLayout(*this);
      double y = frac(x);
      std::size_t i = ietLengths.size() - 1;
      for (std::size_t j = 0; j + 1 < L.start.size(); ++j)
        if (y < L.start[j + 1]) {
          i = j;
          break;
        }
      return L.exStart[i] + (y - L.start[i]);
    }
    case Space::odometer: {
      const long long n = 1LL << odoDepth;
      return static_cast<double>((odoState(*this, x) + 1) % n) / static_cast<double>(n);
    }
    case Space::atoms:
      return atomX[atomPerm[atomIndex(*this, x)]];
  }
  throw StructuralError("apply: unknown space");
}

double TransversalSystem::applyInverse(double x) const {
  switch (space) {
    case Space::circle:
      return frac(frac(x) - alpha);
    case Space::iet: {
      auto L = ietLayout(*this);
      double y = frac(x);
      for (std::size_t i = 0; i < ietLengths.size(); ++i)
        if (y >= L.exStart[i] - 1e-15 && y < L.exStart[i] + ietLengths[i])
          return L.start[i] + (y - L.exStart[i]);
      return L.start.back() + (y - L.exStart.back());
    }
    case Space::odometer: {
      const long long n = 1LL << odoDepth;
      return static_cast<double>((odoState(*this, x) + n - 1) % n) / static_cast<double>(n);
    }
    case Space::atoms: {
      std::size_t i = atomIndex(*this, x);
      for (std::size_t j = 0; j < atomPerm.size(); ++j)
        if (atomPerm[j] == static_cast<int>(i)) return atomX[j];
      throw StructuralError("atoms: permutation has no preimage");
    }
  }
  throw StructuralError("applyInverse: unknown space");
}

double TransversalSystem::measureInterval(double a, double b) const {
  if (!(a <= b) || a < -1e-12 || b > 1.0 + 1e-12)
    throw DomainError("measureInterval: need 0 <= a <= b <= 1");
  a = std::max(a, 0.0);
  b = std::min(b, 1.0);
  switch (space) {
    case Space::circle:
    case Space::iet:
      return b - a;
    case Space::odometer: {
      const double n = static_cast<double>(1LL << odoDepth);
      // states k/n with a <= k/n < b; the nudge keeps exact edges inclusive
      long long lo = static_cast<long long>(std::ceil(a * n - 1e-9));
      long long hi = static_cast<long long>(std::ceil(b * n - 1e-9));
      return static_cast<double>(hi - lo) / n;
    }
    case Space::atoms: {
      double m = 0;
      for (std::size_t i = 0; i < atomX.size(); ++i)
        if (atomX[i] >= a - 1e-15 && atomX[i] < b - 1e-15) m += atomW[i];
      return m;
    }
  }
  throw StructuralError("measureInterval: unknown space");
}

double TransversalSystem::integrate(const std::function<double(double)>& h,
                                    int panels) const {
  if (panels < 1) throw DomainError("integrate: panels must be positive");
  switch (space) {
    case Space::circle:
    case Space::iet: {
      double s = 0;
      for (int j = 0; j < panels; ++j)
        s += h((j + 0.5) / static_cast<double>(panels));
      return s / static_cast<double>(panels);
    }
    case Space::odometer: {
      const long long n = 1LL << odoDepth;
      double s = 0;
      for (long long k = 0; k < n; ++k)
        s += h(static_cast<double>(k) / static_cast<double>(n));
      return s / static_cast<double>(n);
    }
    case Space::atoms: {
      double s = 0;
      for (std::size_t i = 0; i < atomX.size(); ++i) s += atomW[i] * h(atomX[i]);
      return s;
    }
  }
  throw StructuralError("integrate: unknown space");
}

double invariance_defect(const TransversalSystem& sys,
                         const std::function<double(double)>& h, int panels) {
  double plain = sys.integrate(h, panels);
  double pushed = sys.integrate([&](double x) { return h(sys.apply(x)); }, panels);
  return std::abs(pushed - plain);
}

RoofFunction RoofFunction::constant(double value) {
  RoofFunction r;
  r.trig.constant = value;
  return r;
}

RoofFunction RoofFunction::piecewise(std::vector<double> edges,
                                     std::vector<double> values) {
  RoofFunction r;
  checkEdges(edges, values.size(), "RoofFunction");
  r.cellEdges = std::move(edges);
  r.cellValues = std::move(values);
  return r;
}

double RoofFunction::eval(double x) const {
  double y = frac(x);
  if (!cellEdges.empty()) return cellValues[cellIndex(cellEdges, y)];
  Vec p(1);
  p[0] = y;
  return trig.eval(p);
}

double RoofFunction::infValue() const {
  if (!cellEdges.empty())
    return *std::min_element(cellValues.begin(), cellValues.end());
  double v = trig.constant;
  for (const auto& t : trig.terms) v -= std::hypot(t.cosAmp, t.sinAmp);
  return v;
}

double RoofFunction::supValue() const {
  if (!cellEdges.empty())
    return *std::max_element(cellValues.begin(), cellValues.end());
  double v = trig.constant;
  for (const auto& t : trig.terms) v += std::hypot(t.cosAmp, t.sinAmp);
  return v;
}

IVec PiecewiseClass::eval(double x) const {
  if (cellEdges.empty()) throw StructuralError("PiecewiseClass: empty");
  return cellValues[cellIndex(cellEdges, frac(x))];
}

int PiecewiseClass::dim() const {
  if (cellValues.empty()) throw StructuralError("PiecewiseClass: empty");
  return static_cast<int>(cellValues.front().size());
}

void validate_solenoid(const SuspensionSolenoid& sol) {
  sol.base.validate();
  if (!sol.roof.cellEdges.empty()) {
    checkEdges(sol.roof.cellEdges, sol.roof.cellValues.size(), "roof");
  } else {
    for (const auto& t : sol.roof.trig.terms)
      if (t.freq.size() != 1)
        throw StructuralError("roof: trig frequencies must be 1-dimensional");
  }
  if (!(sol.roof.infValue() > 0))
    throw DomainError("roof: infimum must be positive");
  if (!std::isfinite(sol.roof.supValue()))
    throw DomainError("roof: supremum must be finite");
  checkEdges(sol.phi.cellEdges, sol.phi.cellValues.size(), "phi");
  int d = sol.phi.dim();
  if (d < 1) throw StructuralError("phi: class dimension must be positive");
  for (const auto& v : sol.phi.cellValues)
    if (v.size() != d) throw StructuralError("phi: mixed class dimensions");
  if (sol.realization && sol.realization->direction.size() != 2)
    throw StructuralError("realization: direction must be planar");
}

BirkhoffResult birkhoff_average(const TransversalSystem& sys,
                                const std::function<double(double)>& w, double x0,
                                long long steps) {
  if (steps < 1) throw DomainError("birkhoff_average: steps must be positive");
  sys.validate();
  double x = x0;
  double total = 0, block1 = 0, block2 = 0;
  const long long q1 = steps / 4, q2 = steps / 2;
  for (long long i = 0; i < steps; ++i) {
    double v = w(x);
    total += v;
    if (i >= q1 && i < q2) block1 += v;
    if (i >= q2) block2 += v;
    x = sys.apply(x);
  }
  BirkhoffResult r;
  r.steps = steps;
  r.value = total / static_cast<double>(steps);
  if (steps >= 4) {
    double b1 = block1 / static_cast<double>(q2 - q1);
    double b2 = block2 / static_cast<double>(steps - q2);
    r.tail = std::max(std::abs(b1 - r.value), std::abs(b2 - r.value));
  }
  return r;
}

double exact_roof_integral(const TransversalSystem& sys, const RoofFunction& roof) {
  if (!roof.cellEdges.empty()) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < roof.cellEdges.size(); ++i)
      s += roof.cellValues[i] *
           sys.measureInterval(roof.cellEdges[i], roof.cellEdges[i + 1]);
    return s;
  }
  switch (sys.space) {
    case TransversalSystem::Space::circle:
    case TransversalSystem::Space::iet: {
      // Lebesgue kills every nonzero frequency
      double s = roof.trig.constant;
      for (const auto& t : roof.trig.terms)
        if (t.freq.isZero()) s += t.cosAmp;
      return s;
    }
    default:
      return sys.integrate([&](double x) { return roof.eval(x); });
  }
}

Vec exact_class_integral(const TransversalSystem& sys, const PiecewiseClass& phi) {
  Vec s = Vec::Zero(phi.dim());
  for (std::size_t i = 0; i + 1 < phi.cellEdges.size(); ++i)
    s += toReal(phi.cellValues[i]) *
         sys.measureInterval(phi.cellEdges[i], phi.cellEdges[i + 1]);
  return s;
}

namespace {

AsymptoticEstimate quotientEstimate(const Vec& v1, const Vec& v2, const Vec& v3,
                                    double tol) {
  AsymptoticEstimate est;
  est.route = Route::calib;
  est.value = v3;
  est.residual = std::max({(v1 - v2).norm(), (v1 - v3).norm(), (v2 - v3).norm()});
  est.converged = est.residual <= tol;
  est.windowsUsed = 3;
  return est;
}

}  // namespace

MeasuredParts ruelle_sullivan_parts(const SuspensionSolenoid& sol) {
  validate_solenoid(sol);
  MeasuredParts p;
  p.phiIntegral = exact_class_integral(sol.base, sol.phi);
  p.roofIntegral = exact_roof_integral(sol.base, sol.roof);
  return p;
}

Vec ruelle_sullivan_class(const SuspensionSolenoid& sol) {
  MeasuredParts p = ruelle_sullivan_parts(sol);
  if (!(p.roofIntegral > 0))
    throw NumericalError("ruelle_sullivan_class: roof integral not positive");
  return p.phiIntegral / p.roofIntegral;
}

LeafClassResult leaf_schwartzman_class(const SuspensionSolenoid& sol, double x0,
                                       long long steps, double tol) {
  validate_solenoid(sol);
  if (steps < 8) throw DomainError("leaf_schwartzman_class: need at least 8 returns");
  if (!(tol > 0)) throw DomainError("leaf_schwartzman_class: tolerance must be positive");
  const long long c1 = steps / 4, c2 = steps / 2;
  Vec sumPhi = Vec::Zero(sol.phi.dim());
  double sumRoof = 0;
  Vec v1, v2;
  double x = x0;
  for (long long i = 0; i < steps; ++i) {
    sumPhi += toReal(sol.phi.eval(x));
    sumRoof += sol.roof.eval(x);
    x = sol.base.apply(x);
    if (i + 1 == c1) v1 = sumPhi / sumRoof;
    if (i + 1 == c2) v2 = sumPhi / sumRoof;
  }
  Vec v3 = sumPhi / sumRoof;

  LeafClassResult out;
  out.symbolic = quotientEstimate(v1, v2, v3, tol);
  if (!out.symbolic.converged) {
    std::ostringstream os;
    os << "Birkhoff quotient not stabilized over returns " << c1 << ", " << c2
       << ", " << steps;
    out.symbolic.diagnostics.push_back(os.str());
  }

  if (sol.realization) {
    LiftedCurve leaf = realized_leaf_curve(sol, x0);
    const double T = std::min(1.0e4, sumRoof);
    WindowSchedule sched = WindowSchedule::geometric(T / 256.0, T / 256.0, 9, 2.0);
    RoutePayload payload;
    payload.tol = tol;
    Hypersurface h1, h2;
    h1.normal = Eigen::VectorXi(2);
    h1.normal << 1, 0;
    h1.offset = 0.5;
    h2.normal = Eigen::VectorXi(2);
    h2.normal << 0, 1;
    h2.offset = 0.5;
    payload.surfaces = {h1, h2};
    // linear leaves cross both level families with slopes 1 and alpha, so a
    // coarse audit step is safe; the count itself is exact
    payload.crossStep = 0.4;
    out.geometric = route_estimate(leaf, TorusGeometry::unitFlat(2), Route::cross,
                                   sched, payload);
  }
  return out;
}

SuspensionSolenoid realize_as_torus_flow(double alpha, bool arcLength) {
  double a = frac(alpha);
  SuspensionSolenoid sol;
  sol.base = TransversalSystem::rotation(a);
  const double speed = std::sqrt(1.0 + a * a);
  sol.roof = RoofFunction::constant(arcLength ? speed : 1.0);

  IVec plain(2), wrap(2);
  plain << 1, 0;
  wrap << 1, 1;
  if (a > 1e-12 && a < 1.0 - 1e-12) {
    sol.phi.cellEdges = {0.0, 1.0 - a, 1.0};
    sol.phi.cellValues = {plain, wrap};
  } else {
    sol.phi.cellEdges = {0.0, 1.0};
    sol.phi.cellValues = {plain};
  }

  TorusFlowRealization real;
  real.alpha = a;
  real.arcLength = arcLength;
  real.direction = Vec(2);
  real.direction << 1.0, a;
  if (arcLength) real.direction /= speed;
  sol.realization = real;

  for (long long q = 1; q <= 100000; ++q) {
    double d = std::abs(a * static_cast<double>(q) -
                        std::round(a * static_cast<double>(q)));
    if (d < 1e-9) {
      std::ostringstream os;
      os << "alpha is within 1e-9 of the rational "
         << std::llround(a * static_cast<double>(q)) << "/" << q
         << "; leaves close up at scale " << q;
      sol.notes.push_back(os.str());
      break;
    }
  }
  validate_solenoid(sol);
  return sol;
}

LiftedCurve realized_leaf_curve(const SuspensionSolenoid& sol, double seed) {
  if (!sol.realization)
    throw DomainError("realized_leaf_curve: solenoid has no torus realization");
  Vec x0(2);
  x0 << 0.0, frac(seed);
  return linear_flow_curve(sol.realization->direction, x0);
}

EmpiricalMeasure empirical_transversal_measure(const SuspensionSolenoid& sol,
                                               double seed, long long steps) {
  validate_solenoid(sol);
  if (steps < 1) throw DomainError("empirical_transversal_measure: steps must be positive");
  EmpiricalMeasure m;
  m.x.reserve(steps);
  m.w.reserve(steps);
  double x = seed;
  double total = 0;
  for (long long i = 0; i < steps; ++i) {
    double l = sol.roof.eval(x);
    m.x.push_back(x);
    m.w.push_back(l);
    total += l;
    x = sol.base.apply(x);
  }
  for (double& w : m.w) w /= total;

  for (int j = 0; j < 64; ++j) {
    const double lo = j / 64.0, hi = (j + 1) / 64.0;
    double emp = 0;
    for (std::size_t i = 0; i < m.x.size(); ++i)
      if (m.x[i] >= lo && m.x[i] < hi) emp += m.w[i];
    m.distance = std::max(m.distance,
                          std::abs(emp - sol.base.measureInterval(lo, hi)));
  }
  return m;
}

std::vector<double> controlled_growth_ratio(const SuspensionSolenoid& sol, double seed,
                                            const std::vector<double>& radii) {
  validate_solenoid(sol);
  for (double r : radii)
    if (!(r > 0)) throw DomainError("controlled_growth_ratio: radii must be positive");
  if (radii.empty()) return {};

  const double rMax = *std::max_element(radii.begin(), radii.end());
  const double infRoof = sol.roof.infValue();
  const long long budget =
      static_cast<long long>(2.0 * rMax / infRoof) + 8;
  if (budget > 100000000LL)
    throw NumericalError("controlled_growth_ratio: walk budget exceeded");

  // one scouting pass to detect a compact (periodic) leaf
  double period = -1.0;
  {
    double x = seed, cum = 0;
    for (long long i = 0; i < budget; ++i) {
      cum += sol.roof.eval(x);
      x = sol.base.apply(x);
      if (std::abs(x - seed) <= 1e-12) {
        period = cum;
        break;
      }
      if (cum > 2.0 * rMax) break;
    }
  }

  auto arm = [&](double r, bool forward, double& full, double& partial) {
    double x = seed, cum = 0;
    full = partial = 0;
    for (long long i = 0; i < budget; ++i) {
      double y = forward ? x : sol.base.applyInverse(x);
      double l = sol.roof.eval(forward ? x : y);
      if (cum + l <= r + 1e-12) {
        full += l;
        cum += l;
        x = forward ? sol.base.apply(x) : y;
        continue;
      }
      if (cum < r - 1e-12) partial = l;
      return;
    }
  };

  std::vector<double> ratios;
  ratios.reserve(radii.size());
  for (double r : radii) {
    if (period > 0 && 2.0 * r >= period - 1e-12) {
      ratios.push_back(0.0);  // the ball wraps the whole compact leaf
      continue;
    }
    double fullF, partF, fullB, partB;
    arm(r, true, fullF, partF);
    arm(r, false, fullB, partB);
    const double full = fullF + fullB, part = partF + partB;
    ratios.push_back(full > 0 ? part / full
                              : std::numeric_limits<double>::infinity());
  }
  return ratios;
}

}  // namespace acyc

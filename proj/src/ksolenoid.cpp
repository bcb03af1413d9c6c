#include "acyc/ksolenoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace acyc {
namespace {

double frac(double x) { return x - std::floor(x); }

void checkRoofShape(const RoofFunction& roof, const char* who) {
  if (!roof.cellEdges.empty()) {
    if (roof.cellEdges.size() != roof.cellValues.size() + 1)
      throw StructuralError(std::string(who) + ": cell edges/values size mismatch");
  } else {
    for (const auto& t : roof.trig.terms)
      if (t.freq.size() != 1)
        throw StructuralError(std::string(who) + ": trig frequencies must be 1-dimensional");
  }
}

}  // namespace

void validate_trapping(const TrappingSolenoid& sol) {
  sol.base.validate();
  checkRoofShape(sol.slabVolume, "slabVolume");
  checkRoofShape(sol.separation, "separation");
  checkRoofShape(sol.diameter, "diameter");
  if (!(sol.slabVolume.infValue() > 0))
    throw DomainError("slabVolume: infimum must be positive");
  if (!(sol.separation.infValue() > 0))
    throw DomainError("separation: infimum must be positive");
  if (!(sol.epsilon0 > 0) || !(sol.epsilon0 < 0.5))
    throw DomainError("epsilon0 must lie in (0, 1/2)");
  for (int i = 0; i < 256; ++i) {
    double x = (i + 0.5) / 256.0;
    if (sol.diameter.eval(x) + 1e-12 < sol.separation.eval(x))
      throw StructuralError("diameter must dominate separation");
  }
  if (sol.slabClass.cellEdges.empty())
    throw StructuralError("slabClass: empty");
  int d = sol.slabClass.dim();
  for (const auto& v : sol.slabClass.cellValues)
    if (v.size() != d) throw StructuralError("slabClass: mixed dimensions");
  if (sol.t3 && d != 3)
    throw StructuralError("T^3 immersion requires 3-dimensional classes");
}

void measure_constants(TrappingSolenoid& sol) {
  if (sol.c0 == 0) sol.c0 = sol.separation.infValue();
  if (sol.c1 == 0) sol.c1 = sol.diameter.supValue();
  if (sol.c2 == 0) sol.c2 = sol.slabVolume.supValue();
}

IVec slab_sum_class(const TrappingSolenoid& sol, double x0, long long a, long long b) {
  validate_trapping(sol);
  if (a > b) throw DomainError("slab_sum_class: need a <= b");
  IVec sum = IVec::Zero(sol.slabClass.dim());
  double x = x0;
  for (long long i = 0; i < b; ++i) {
    if (i >= a) sum += sol.slabClass.eval(x);
    x = sol.base.apply(x);
  }
  x = x0;
  for (long long i = -1; i >= a; --i) {
    x = sol.base.applyInverse(x);
    if (i < b) sum += sol.slabClass.eval(x);
  }
  return sum;
}

MeasuredParts ruelle_sullivan_parts(const TrappingSolenoid& sol) {
  validate_trapping(sol);
  MeasuredParts p;
  p.phiIntegral = exact_class_integral(sol.base, sol.slabClass);
  p.roofIntegral = exact_roof_integral(sol.base, sol.slabVolume);
  return p;
}

Vec ruelle_sullivan_class(const TrappingSolenoid& sol) {
  MeasuredParts p = ruelle_sullivan_parts(sol);
  if (!(p.roofIntegral > 0))
    throw NumericalError("ruelle_sullivan_class: volume integral not positive");
  return p.phiIntegral / p.roofIntegral;
}

KClassResult k_schwartzman_class(const TrappingSolenoid& sol, double x0,
                                 const std::vector<KWindow>& windows, double tol,
                                 double capVolume) {
  validate_trapping(sol);
  if (windows.size() < 3)
    throw DomainError("k_schwartzman_class: need at least 3 windows");
  if (capVolume < 0) throw DomainError("k_schwartzman_class: negative cap volume");
  long long maxB = 0, minA = 0;
  long long prevWidth = 0;
  for (const auto& w : windows) {
    if (w.a > 0 || w.b <= 0)
      throw StructuralError("k_schwartzman_class: windows must satisfy a <= 0 < b");
    if (w.b - w.a <= prevWidth)
      throw StructuralError("k_schwartzman_class: window widths must increase");
    prevWidth = w.b - w.a;
    maxB = std::max(maxB, w.b);
    minA = std::min(minA, w.a);
  }

  const int d = sol.slabClass.dim();
  // prefix sums: forward over x0, R x0, ... and backward over R^-1 x0, ...
  std::vector<Vec> phiF(maxB + 1, Vec::Zero(d)), phiB(-minA + 1, Vec::Zero(d));
  std::vector<double> volF(maxB + 1, 0.0), volB(-minA + 1, 0.0);
  double x = x0;
  for (long long i = 0; i < maxB; ++i) {
    phiF[i + 1] = phiF[i] + toReal(sol.slabClass.eval(x));
    volF[i + 1] = volF[i] + sol.slabVolume.eval(x);
    x = sol.base.apply(x);
  }
  x = x0;
  for (long long i = 0; i < -minA; ++i) {
    x = sol.base.applyInverse(x);
    phiB[i + 1] = phiB[i] + toReal(sol.slabClass.eval(x));
    volB[i + 1] = volB[i] + sol.slabVolume.eval(x);
  }

  std::vector<Vec> values;
  double lastVolume = 0;
  for (const auto& w : windows) {
    Vec numer = phiF[w.b] + phiB[-w.a];
    double vol = volF[w.b] + volB[-w.a] + capVolume;
    if (!(vol > 0)) throw NumericalError("k_schwartzman_class: window volume not positive");
    values.push_back(numer / vol);
    lastVolume = vol;
  }

  KClassResult out;
  const std::size_t n = values.size();
  const Vec &u = values[n - 3], &v = values[n - 2], &w = values[n - 1];
  out.estimate.route = Route::calib;
  out.estimate.value = w;
  out.estimate.residual =
      std::max({(u - v).norm(), (u - w).norm(), (v - w).norm()});
  out.estimate.converged = out.estimate.residual <= tol;
  out.estimate.windowsUsed = static_cast<int>(n);
  if (!out.estimate.converged)
    out.estimate.diagnostics.push_back("class quotient not stabilized over the last three windows");
  out.lastVolume = lastVolume;
  out.capShare = capVolume / lastVolume;
  return out;
}

ExhaustionReport exhaustion_control_check(const TrappingSolenoid& solIn, double x0,
                                          const std::vector<double>& radii) {
  validate_trapping(solIn);
  TrappingSolenoid sol = solIn;
  measure_constants(sol);
  if (!(sol.c0 > 0) || !(sol.c1 >= sol.c0))
    throw NumericalError("exhaustion_control_check: degenerate constants");
  for (double r : radii)
    if (!(r > 0)) throw DomainError("exhaustion_control_check: radii must be positive");

  ExhaustionReport rep;
  rep.bound = sol.c1 / sol.c0 + 2.0;
  if (radii.empty()) {
    rep.allWithinBound = true;
    rep.adjacencyPathOk = true;
    return rep;
  }
  const double rMax = *std::max_element(radii.begin(), radii.end());
  const long long fibers = static_cast<long long>(rMax / sol.c0) + 4;
  if (fibers > 10000000LL)
    throw NumericalError("exhaustion_control_check: fiber budget exceeded");

  // one-sided slab data along the chain; index i is the i-th slab out
  auto sideData = [&](bool forward, std::vector<double>& sep,
                      std::vector<double>& diam, std::vector<double>& vol) {
    double x = x0;
    bool coherent = true;
    for (long long i = 0; i < fibers; ++i) {
      double y = forward ? x : sol.base.applyInverse(x);
      double at = forward ? x : y;
      sep.push_back(sol.separation.eval(at));
      diam.push_back(sol.diameter.eval(at));
      vol.push_back(sol.slabVolume.eval(at));
      if (i < 64) {
        double back = forward ? sol.base.applyInverse(sol.base.apply(x))
                              : sol.base.apply(y);
        if (std::abs(back - x) > 1e-9) coherent = false;
      }
      x = forward ? sol.base.apply(x) : y;
    }
    return coherent;
  };
  std::vector<double> sepF, diamF, volF, sepB, diamB, volB;
  bool okF = sideData(true, sepF, diamF, volF);
  bool okB = sideData(false, sepB, diamB, volB);
  rep.adjacencyPathOk = okF && okB;

  auto windows = [&](double r, const std::vector<double>& sep,
                     const std::vector<double>& diam, long long& inner,
                     long long& outer) {
    double chain = 0;  // distance to fiber j along the slab chain
    inner = -1;
    outer = -1;
    for (long long j = 0; j < static_cast<long long>(sep.size()); ++j) {
      if (inner < 0 && chain + diam[j] > r + 1e-12) inner = j;
      chain += sep[j];
      if (chain >= r - 1e-12) {
        outer = j + 1;
        break;
      }
    }
    if (outer < 0) throw NumericalError("exhaustion_control_check: chain too short");
    if (inner < 0) inner = outer;  // every covered slab also fits inside
    inner = std::min(inner, outer);
  };

  rep.allWithinBound = true;
  for (double r : radii) {
    ExhaustionRow row;
    row.radius = r;
    long long bI, bO, aI, aO;
    windows(r, sepF, diamF, bI, bO);
    windows(r, sepB, diamB, aI, aO);
    row.bInner = bI;
    row.bOuter = bO;
    row.aInner = -aI;
    row.aOuter = -aO;
    for (long long j = 0; j < bI; ++j) row.innerVolume += volF[j];
    for (long long j = 0; j < aI; ++j) row.innerVolume += volB[j];
    for (long long j = bI; j < bO; ++j) row.defectVolume += volF[j];
    for (long long j = aI; j < aO; ++j) row.defectVolume += volB[j];
    row.ratio = row.innerVolume > 0
                    ? row.defectVolume / row.innerVolume
                    : std::numeric_limits<double>::infinity();
    row.withinBound = static_cast<double>(bO - bI) < rep.bound - 1e-9 &&
                      static_cast<double>(aO - aI) < rep.bound - 1e-9;
    rep.allWithinBound = rep.allWithinBound && row.withinBound;
    rep.rows.push_back(row);
  }
  return rep;
}

TrappingSolenoid t3_trapping_solenoid(double alpha, double wrapLo, double wrapHi,
                                      bool unitVolume) {
  double a = frac(alpha);
  if (!(a > 1e-9) || !(a < 1.0 - 1e-9))
    throw DomainError("t3_trapping_solenoid: alpha must be irrational-like in (0,1)");
  if (!(wrapLo >= 0.0) || !(wrapHi <= 1.0) || !(wrapLo <= wrapHi))
    throw DomainError("t3_trapping_solenoid: wrap cell must satisfy 0 <= lo <= hi <= 1");

  std::vector<double> edges = {0.0, 1.0 - a, wrapLo, wrapHi, 1.0};
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double p, double q) { return std::abs(p - q) < 1e-12; }),
              edges.end());
  if (std::abs(edges.front()) > 1e-12) edges.insert(edges.begin(), 0.0);
  if (std::abs(edges.back() - 1.0) > 1e-12) edges.push_back(1.0);
  edges.front() = 0.0;
  edges.back() = 1.0;

  TrappingSolenoid sol;
  sol.base = TransversalSystem::rotation(a);
  sol.epsilon0 = 0.25;
  std::vector<double> vols, seps, diams;
  std::vector<IVec> classes;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double mid = 0.5 * (edges[i] + edges[i + 1]);
    long long wind = (mid >= wrapLo && mid < wrapHi) ? 1 : 0;
    double delta = (frac(mid + a) - mid) + static_cast<double>(wind);
    double area = std::sqrt(1.0 + delta * delta);
    vols.push_back(unitVolume ? 1.0 : area);
    seps.push_back(area);
    diams.push_back(std::sqrt(1.0 + delta * delta + 0.25));
    IVec cls(3);
    cls << 1, wind, 0;
    classes.push_back(cls);
  }
  sol.slabVolume = RoofFunction::piecewise(edges, vols);
  sol.separation = RoofFunction::piecewise(edges, seps);
  sol.diameter = RoofFunction::piecewise(edges, diams);
  sol.slabClass.cellEdges = edges;
  sol.slabClass.cellValues = classes;
  sol.t3 = T3Immersion{a, wrapLo, wrapHi, unitVolume};
  measure_constants(sol);
  sol.notes.push_back(
      "T^3 immersion: base circle in coordinate 1, suspension direction in "
      "coordinate 2, free leaf circle in coordinate 3");
  validate_trapping(sol);

  // construction-time cross-check of the declared class table
  for (int i = 0; i < 64; ++i) t3_geometric_class(sol, (i + 0.5) / 64.0);
  return sol;
}

IVec t3_geometric_class(const TrappingSolenoid& sol, double x) {
  if (!sol.t3) throw DomainError("t3_geometric_class: solenoid has no T^3 immersion");
  const T3Immersion& imm = *sol.t3;
  const double xm = frac(x);
  const double wind = (xm >= imm.wrapLo && xm < imm.wrapHi) ? 1.0 : 0.0;
  const double next = frac(xm + imm.alpha);
  const double delta = (next - xm) + wind;
  const double ret = xm - next;  // cap return inside the collar chart

  // closed polyline in the (u, base) torus; the free circle factor makes
  // the third intersection count vanish identically
  struct Pt {
    double u, base;
  };
  std::vector<Pt> poly;
  const int K = 64;
  for (int i = 0; i <= K; ++i) {
    double s = i / static_cast<double>(K);
    poly.push_back({s, xm + delta * s});
  }
  for (int i = 1; i <= K; ++i) {
    double s = i / static_cast<double>(K);
    // lifted cap: continues past u = 1, dipping into the trapping collar
    poly.push_back({1.0 - sol.epsilon0 * std::sin(std::numbers::pi * s),
                    xm + delta + ret * s});
  }
  // the lift must close up to a lattice vector: that vector is the winding
  double du = poly.back().u - poly.front().u;
  double db = poly.back().base - poly.front().base;
  if (std::abs(du - std::round(du)) > 1e-9 || std::abs(db - std::round(db)) > 1e-9)
    throw StructuralError("t3_geometric_class: slab boundary does not close");

  // signed crossings of the level family {coord = c + Z}: per-segment floor
  // telescope; segments are short enough to cross at most once
  auto crossings = [&](bool uCoord, double c) {
    long long total = 0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      double p = (uCoord ? poly[i].u : poly[i].base) - c;
      double q = (uCoord ? poly[i + 1].u : poly[i + 1].base) - c;
      if (std::abs(q - p) > 0.9)
        throw NumericalError("t3_geometric_class: polyline segment too long");
      total += static_cast<long long>(std::floor(q)) -
               static_cast<long long>(std::floor(p));
    }
    return total;
  };
  auto stableCount = [&](bool uCoord) {
    const double levels[3] = {0.4182818284590452, 0.5641592653589793,
                              0.7732050807568877};
    long long c0 = crossings(uCoord, levels[0]);
    for (double c : {levels[1], levels[2]})
      if (crossings(uCoord, c) != c0)
        throw NumericalError("t3_geometric_class: crossing count not level-stable");
    return c0;
  };

  IVec geo(3);
  geo << stableCount(true), stableCount(false), 0;
  IVec declared = sol.slabClass.eval(xm);
  if (geo != declared) {
    std::ostringstream os;
    os << "t3_geometric_class: declared class (" << declared.transpose()
       << ") disagrees with the immersed count (" << geo.transpose() << ") at x="
       << xm;
    throw StructuralError(os.str());
  }
  return geo;
}

}  // namespace acyc

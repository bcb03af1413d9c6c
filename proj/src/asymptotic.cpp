#include "acyc/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace acyc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// beyond this magnitude consecutive integers stop being distinguishable
// enough to justify rounding the raw class
constexpr double kRoundLimit = 5.6e14;  // ~2^49

void validateSchedule(const std::vector<std::pair<double, double>>& ws) {
  if (ws.empty()) throw StructuralError("WindowSchedule: empty");
  double prev = -1.0;
  for (auto [s, t] : ws) {
    if (!(s < t)) throw StructuralError("WindowSchedule: window with s >= t");
    if (!(t - s > prev)) throw StructuralError("WindowSchedule: widths must increase");
    prev = t - s;
  }
}

Vec rawWindow(const LiftedCurve& curve, const TorusGeometry& geom, double s, double t) {
  Vec cs = curve.at(s), ct = curve.at(t);
  auto closing = shortest_closing(geom, project(ct), project(cs));
  return Vec(ct - cs + closing.displacement);
}

double maxPairwise(const std::vector<Vec>& vals, std::size_t lastK) {
  std::size_t n = vals.size();
  std::size_t from = n > lastK ? n - lastK : 0;
  double d = 0.0;
  for (std::size_t i = from; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d = std::max(d, (vals[i] - vals[j]).norm());
  return d;
}

void finishEstimate(AsymptoticEstimate& est, const std::vector<Vec>& vals, double tol) {
  est.windowsUsed = static_cast<int>(vals.size());
  if (vals.size() < 3) {
    est.converged = false;
    est.residual = std::numeric_limits<double>::infinity();
    if (!vals.empty()) est.value = vals.back();
    return;
  }
  est.value = vals.back();
  est.residual = maxPairwise(vals, 3);
  est.converged = est.residual <= tol;
}

long long primitiveCheck(const Eigen::VectorXi& k) {
  long long g = 0;
  for (int i = 0; i < k.size(); ++i) g = std::gcd(g, static_cast<long long>(std::abs(k[i])));
  return g;
}

// net signed integer-level crossings of f(u) = <k, c~(u)> - offset on [s,t],
// locating each crossing by bisection and rejecting near-tangent ones
struct CrossingCount {
  long long net = 0;
  bool rejected = false;
  std::string diagnostic;
};

CrossingCount countCrossings(const LiftedCurve& curve, const Hypersurface& H, double s,
                             double t, double step, double transversalityTol) {
  Vec k = H.normal.cast<double>();
  auto f = [&](double u) { return k.dot(curve.at(u)) - H.offset; };
  CrossingCount out;
  double stepEff = step / std::max(1.0, k.norm());
  auto chunks = static_cast<std::size_t>(std::ceil((t - s) / stepEff));
  chunks = std::max<std::size_t>(chunks, 8);
  double h = (t - s) / static_cast<double>(chunks);
  double ua = s, fa = f(ua);
  for (std::size_t c = 0; c < chunks; ++c) {
    double ub = (c + 1 == chunks) ? t : s + static_cast<double>(c + 1) * h;
    double fb = f(ub);
    // the net count telescopes chunk by chunk; boundary hits and interior
    // wiggle pairs cancel without being seen individually
    out.net += static_cast<long long>(std::floor(fb)) - static_cast<long long>(std::floor(fa));
    // transversality audit at every bracketed level
    double lo = std::min(fa, fb), hi = std::max(fa, fb);
    long long mLo = static_cast<long long>(std::ceil(lo));
    long long mHi = static_cast<long long>(std::floor(hi));
    for (long long m = mLo; m <= mHi; ++m) {
      double level = static_cast<double>(m);
      double ga = fa - level, gb = fb - level;
      double u0;
      if (ga == 0.0) {
        u0 = ua;
      } else if (gb == 0.0) {
        u0 = ub;
      } else if ((ga < 0) != (gb < 0)) {
        double a = ua, b = ub;
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (a + b);
          double gm = f(mid) - level;
          if ((ga < 0) == (gm < 0)) {
            a = mid;
            ga = gm;
          } else {
            b = mid;
          }
        }
        u0 = 0.5 * (a + b);
      } else {
        continue;  // level grazed without a bracket: no netted crossing
      }
      double d = std::max(1e-9, 1e-6 * h);
      double slope = (f(std::min(u0 + d, t)) - f(std::max(u0 - d, s))) /
                     (std::min(u0 + d, t) - std::max(u0 - d, s));
      if (std::abs(slope) < transversalityTol) {
        std::ostringstream msg;
        msg << "near-tangent crossing of level " << m << " at u=" << u0 << " in window [" << s
            << "," << t << "]";
        out.rejected = true;
        out.diagnostic = msg.str();
        return out;
      }
    }
    ua = ub;
    fa = fb;
  }
  out.net *= H.sign;
  return out;
}

}  // namespace

WindowSchedule WindowSchedule::geometric(double s0, double t0, int count, double ratio) {
  if (!(s0 > 0.0) || !(t0 > 0.0) || count < 1 || !(ratio > 1.0))
    throw StructuralError("WindowSchedule::geometric: bad parameters");
  WindowSchedule ws;
  double a = s0, b = t0;
  for (int j = 0; j < count; ++j) {
    ws.windows.emplace_back(-a, b);
    a *= ratio;
    b *= ratio;
  }
  validateSchedule(ws.windows);
  return ws;
}

WindowSchedule WindowSchedule::explicitPairs(std::vector<std::pair<double, double>> pairs) {
  WindowSchedule ws;
  ws.windows = std::move(pairs);
  validateSchedule(ws.windows);
  return ws;
}

double ScalarTrig::eval(const Vec& x) const {
  double v = constant;
  for (const auto& term : terms) {
    double th = kTwoPi * term.freq.cast<double>().dot(x);
    v += term.cosAmp * std::cos(th) + term.sinAmp * std::sin(th);
  }
  return v;
}

Vec ScalarTrig::grad(const Vec& x) const {
  Vec g = Vec::Zero(x.size());
  for (const auto& term : terms) {
    double th = kTwoPi * term.freq.cast<double>().dot(x);
    double d = -term.cosAmp * std::sin(th) + term.sinAmp * std::cos(th);
    g += (kTwoPi * d) * term.freq.cast<double>();
  }
  return g;
}

Vec normalized_window(const LiftedCurve& curve, const TorusGeometry& geom, double s,
                      double t) {
  if (!(s < t)) throw DomainError("normalized_window: need s < t");
  Vec raw = rawWindow(curve, geom, s, t);
  if (raw.lpNorm<Eigen::Infinity>() < kRoundLimit)
    for (int i = 0; i < raw.size(); ++i) raw[i] = std::round(raw[i]);
  return Vec(raw / (t - s));
}

IVec window_class(const LiftedCurve& curve, const TorusGeometry& geom, double s, double t) {
  if (!(s < t)) throw DomainError("window_class: need s < t");
  Vec raw = rawWindow(curve, geom, s, t);
  IVec out(raw.size());
  for (int i = 0; i < raw.size(); ++i) {
    if (std::abs(raw[i]) > 4.0e18)
      throw DomainError("window_class: class exceeds the exact integer range");
    out[i] = static_cast<std::int64_t>(std::llround(raw[i]));
  }
  return out;
}

AsymptoticEstimate route_estimate(const LiftedCurve& curve, const TorusGeometry& geom,
                                  Route route, const WindowSchedule& schedule,
                                  const RoutePayload& payload) {
  const int n = curve.dim();
  if (geom.dim() != n) throw StructuralError("route_estimate: dimension mismatch");
  AsymptoticEstimate est;
  est.route = route;
  std::vector<Vec> vals;

  switch (route) {
    case Route::loop: {
      for (auto [s, t] : schedule.windows) vals.push_back(normalized_window(curve, geom, s, t));
      break;
    }
    case Route::calib: {
      if (!payload.phi) throw StructuralError("route_estimate: CALIB needs a calibrator");
      for (auto [s, t] : schedule.windows)
        vals.push_back(Vec(curve_increment(*payload.phi, curve, s, t) / (t - s)));
      break;
    }
    case Route::form: {
      if (static_cast<int>(payload.forms.size()) != n)
        throw StructuralError("route_estimate: FORM needs n independent forms");
      Mat A(n, n);
      for (int i = 0; i < n; ++i) {
        if (payload.forms[static_cast<std::size_t>(i)].a.size() != n)
          throw StructuralError("route_estimate: form coefficient dimension mismatch");
        A.row(i) = payload.forms[static_cast<std::size_t>(i)].a.transpose();
      }
      Eigen::FullPivLU<Mat> lu(A);
      if (!lu.isInvertible())
        throw StructuralError("route_estimate: FORM payload is not independent");
      for (auto [s, t] : schedule.windows) {
        auto chunks = static_cast<std::size_t>(std::ceil((t - s) / payload.formStep));
        chunks = std::max<std::size_t>(chunks, 4);
        double h = (t - s) / static_cast<double>(chunks);
        Vec r = Vec::Zero(n);
        Vec prev = curve.at(s);
        for (std::size_t c = 0; c < chunks; ++c) {
          double ub = (c + 1 == chunks) ? t : s + static_cast<double>(c + 1) * h;
          Vec cur = curve.at(ub);
          Vec mid = curve.at(0.5 * (2.0 * s + (2.0 * static_cast<double>(c) + 1.0) * h));
          Vec dc = cur - prev;
          for (int i = 0; i < n; ++i) {
            const auto& fm = payload.forms[static_cast<std::size_t>(i)];
            r[i] += fm.a.dot(dc) + fm.exact.grad(mid).dot(dc);
          }
          prev = cur;
        }
        vals.push_back(Vec(lu.solve(r) / (t - s)));
      }
      break;
    }
    case Route::circle: {
      if (static_cast<int>(payload.circles.size()) != n)
        throw StructuralError("route_estimate: CIRCLE needs n integer covectors");
      Mat A(n, n);
      for (int i = 0; i < n; ++i) {
        if (payload.circles[static_cast<std::size_t>(i)].size() != n)
          throw StructuralError("route_estimate: circle covector dimension mismatch");
        A.row(i) = payload.circles[static_cast<std::size_t>(i)].cast<double>().transpose();
      }
      Eigen::FullPivLU<Mat> lu(A);
      if (!lu.isInvertible())
        throw StructuralError("route_estimate: CIRCLE payload is not independent");
      for (auto [s, t] : schedule.windows) {
        Vec disp = curve.at(t) - curve.at(s);
        Vec r(n);
        for (int i = 0; i < n; ++i)
          r[i] = payload.circles[static_cast<std::size_t>(i)].cast<double>().dot(disp);
        vals.push_back(Vec(lu.solve(r) / (t - s)));
      }
      break;
    }
    case Route::cross: {
      if (static_cast<int>(payload.surfaces.size()) != n)
        throw StructuralError("route_estimate: CROSS needs n hypersurfaces");
      Mat A(n, n);
      for (int i = 0; i < n; ++i) {
        const auto& H = payload.surfaces[static_cast<std::size_t>(i)];
        if (H.normal.size() != n)
          throw StructuralError("route_estimate: hypersurface normal dimension mismatch");
        if (primitiveCheck(H.normal) != 1)
          throw StructuralError("route_estimate: hypersurface normal must be primitive");
        A.row(i) = H.normal.cast<double>().transpose();
      }
      Eigen::FullPivLU<Mat> lu(A);
      if (!lu.isInvertible())
        throw StructuralError("route_estimate: CROSS payload is not independent");
      for (auto [s, t] : schedule.windows) {
        Vec r(n);
        bool reject = false;
        for (int i = 0; i < n && !reject; ++i) {
          auto cc = countCrossings(curve, payload.surfaces[static_cast<std::size_t>(i)], s, t,
                                   payload.crossStep, payload.transversalityTol);
          if (cc.rejected) {
            est.diagnostics.push_back(cc.diagnostic);
            reject = true;
          } else {
            r[i] = static_cast<double>(cc.net);
          }
        }
        if (!reject) vals.push_back(Vec(lu.solve(r) / (t - s)));
      }
      break;
    }
  }
  finishEstimate(est, vals, payload.tol);
  return est;
}

SchwartzmanResult schwartzman_class(const LiftedCurve& curve, const TorusGeometry& geom,
                                    double tol, const WindowSchedule& schedule) {
  SchwartzmanResult res;
  double s0 = schedule.windows.front().first;
  double t0 = schedule.windows.front().second;
  std::vector<Vec> joint, pos, neg;
  for (auto [s, t] : schedule.windows) {
    joint.push_back(normalized_window(curve, geom, s, t));
    pos.push_back(normalized_window(curve, geom, s0, t));
    neg.push_back(normalized_window(curve, geom, s, t0));
  }
  res.joint.route = Route::loop;
  finishEstimate(res.joint, joint, tol);
  res.positive = pos.back();
  res.negative = neg.back();
  res.positiveStable = pos.size() >= 3 && maxPairwise(pos, 3) <= tol;
  res.negativeStable = neg.size() >= 3 && maxPairwise(neg, 3) <= tol;
  double oneSidedGap = (res.positive - res.negative).norm();
  res.converged = res.joint.converged && res.positiveStable && res.negativeStable &&
                  oneSidedGap <= tol;
  std::vector<Vec> tail;
  auto takeLast3 = [&tail](const std::vector<Vec>& v) {
    for (std::size_t i = v.size() > 3 ? v.size() - 3 : 0; i < v.size(); ++i)
      tail.push_back(v[i]);
  };
  takeLast3(joint);
  takeLast3(pos);
  takeLast3(neg);
  res.clusterDiameter = maxPairwise(tail, tail.size());
  if (!res.converged) {
    PointSet dirs;
    for (const auto& w : tail) dirs.add(w);
    auto cone = cone_from_samples(dirs, 0.1, 0.05);
    std::ostringstream msg;
    msg << "latest windowed classes split into " << cone.rays.size()
        << " direction(s); diameter " << res.clusterDiameter;
    res.notes.push_back(msg.str());
  }
  return res;
}

WindowGrid WindowGrid::geometric(double s0, double t0, int countS, int countT, double ratio) {
  if (!(s0 > 0.0) || !(t0 > 0.0) || countS < 2 || countT < 2 || !(ratio > 1.0))
    throw StructuralError("WindowGrid::geometric: bad parameters");
  WindowGrid g;
  double a = s0;
  for (int i = 0; i < countS; ++i) {
    g.negTimes.push_back(a);
    a *= ratio;
  }
  double b = t0;
  for (int j = 0; j < countT; ++j) {
    g.posTimes.push_back(b);
    b *= ratio;
  }
  for (double sv : g.negTimes)
    for (double tv : g.posTimes) g.pairs.emplace_back(-sv, tv);
  return g;
}

WindowGrid WindowGrid::fromTimes(const std::vector<double>& times) {
  if (times.size() < 2) throw StructuralError("WindowGrid::fromTimes: need at least 2 times");
  WindowGrid g;
  for (double t : times) {
    if (!(t > 0.0)) throw StructuralError("WindowGrid::fromTimes: times must be positive");
    g.posTimes.push_back(t);
    g.negTimes.push_back(t);
    g.pairs.emplace_back(-t, t);
  }
  return g;
}

ClusterEstimate cluster_scan(const LiftedCurve& curve, const TorusGeometry& geom,
                             const WindowGrid& grid) {
  if (grid.posTimes.empty() || grid.negTimes.empty() || grid.pairs.empty())
    throw StructuralError("cluster_scan: empty grid");
  auto span = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
  };
  if (span(grid.posTimes) < 999.0 || span(grid.negTimes) < 999.0)
    throw StructuralError("cluster_scan: window times must span at least 3 decades");

  std::map<double, Vec> posCache, negCache;
  auto wPos = [&](double t) -> const Vec& {
    auto it = posCache.find(t);
    if (it == posCache.end())
      it = posCache.emplace(t, normalized_window(curve, geom, 0.0, t)).first;
    return it->second;
  };
  auto wNeg = [&](double sAbs) -> const Vec& {
    auto it = negCache.find(sAbs);
    if (it == negCache.end())
      it = negCache.emplace(sAbs, normalized_window(curve, geom, -sAbs, 0.0)).first;
    return it->second;
  };

  ClusterEstimate est;
  for (double t : grid.posTimes) est.positive.add(wPos(t), 0.0, t);
  for (double sAbs : grid.negTimes) est.negative.add(wNeg(sAbs), -sAbs, 0.0);
  for (auto [s, t] : grid.pairs) {
    Vec w = normalized_window(curve, geom, s, t);
    est.full.add(w, s, t);
    double posDrift = (wPos(t) - wPos(t / 10.0)).norm();
    double negDrift = (wNeg(-s) - wNeg(-s / 10.0)).norm();
    if (posDrift <= grid.balancedTol && negDrift <= grid.balancedTol)
      est.balanced.add(w, s, t);
  }
  return est;
}

BalancedCheckReport balanced_cluster_check(const ClusterEstimate& est, double tol) {
  if (est.positive.empty() || est.negative.empty())
    throw StructuralError("balanced_cluster_check: need non-empty one-sided scans");
  BalancedCheckReport rep;
  // the additive hull is the union of segments [a,b] over one-sided samples;
  // measure distance to it exactly rather than through point sampling
  rep.hullOk = true;
  for (const auto& w : est.balanced.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : est.positive.points)
      for (const auto& b : est.negative.points)
        best = std::min(best, distance_to_segment(w, a, b));
    if (best > rep.worstHullDistance) {
      rep.worstHullDistance = best;
      rep.worstHullPoint = w;
    }
    if (best > tol) rep.hullOk = false;
  }

  std::size_t nPos = est.positive.size(), nNeg = est.negative.size();
  std::size_t total = nPos * nNeg;
  std::size_t stride = std::max<std::size_t>(1, total / 100);
  rep.segmentOk = true;
  for (std::size_t idx = 0; idx < total; idx += stride) {
    const Vec& a = est.positive.points[idx / nNeg];
    const Vec& b = est.negative.points[idx % nNeg];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : est.balanced.points)
      best = std::min(best, distance_to_segment(w, a, b));
    ++rep.pairsTested;
    if (best > rep.worstSegmentGap) {
      rep.worstSegmentGap = best;
      rep.worstSegmentA = a;
      rep.worstSegmentB = b;
    }
    if (best > tol) rep.segmentOk = false;
  }
  return rep;
}

UnparametrizedCluster unparametrized_cluster(const LiftedCurve& curve,
                                             const TorusGeometry& geom,
                                             const std::vector<SpeedFunction>& speeds,
                                             const WindowGrid& grid, double angularTol,
                                             double zeroTol) {
  if (speeds.empty()) throw StructuralError("unparametrized_cluster: empty speed family");
  UnparametrizedCluster out;
  auto sigma = [](const SpeedFunction& sf, double u) {
    return sf.lambda * std::copysign(std::pow(std::abs(u), sf.exponent), u);
  };
  for (const auto& sf : speeds) {
    if (!(sf.lambda > 0.0) || !(sf.exponent > 0.0))
      throw StructuralError("unparametrized_cluster: speeds must be positive");
    for (auto [s, t] : grid.pairs) {
      double ss = sigma(sf, s), st = sigma(sf, t);
      if (ss < curve.tmin() || st > curve.tmax()) continue;
      Vec cs = curve.at(ss), ct = curve.at(st);
      auto closing = shortest_closing(geom, project(ct), project(cs));
      out.samples.add(Vec((ct - cs + closing.displacement) / (t - s)), s, t);
    }
  }
  if (out.samples.empty())
    throw DomainError("unparametrized_cluster: no windows inside the curve domain");
  out.cone = cone_from_samples(out.samples, angularTol, zeroTol);
  return out;
}

}  // namespace acyc

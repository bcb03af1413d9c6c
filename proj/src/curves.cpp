#include "acyc/curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace acyc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct AnalyticImpl : LiftedCurve::Impl {
  std::function<Vec(double)> f;
  std::optional<LiftedCurve::LinearData> lin;
  Vec eval(double t) const override { return f(t); }
};

struct PiecewiseImpl : LiftedCurve::Impl {
  std::vector<double> ts;
  std::vector<Vec> ps;
  bool constantBefore = false;

  Vec eval(double t) const override {
    if (t <= ts.front()) return ps.front();
    if (t >= ts.back()) return ps.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
    if (t == ts[i]) return ps[i];  // waypoints are hit exactly
    double u = (t - ts[i]) / (ts[i + 1] - ts[i]);
    return (1.0 - u) * ps[i] + u * ps[i + 1];
  }
};

struct OdeImpl : LiftedCurve::Impl {
  // ascending node times with states and field values; cubic Hermite between
  std::vector<double> ts;
  std::vector<Vec> xs, vs;

  Vec eval(double t) const override {
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    if (i + 1 >= ts.size()) i = ts.size() - 2;
    double h = ts[i + 1] - ts[i];
    double u = (t - ts[i]) / h;
    double u2 = u * u, u3 = u2 * u;
    double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * xs[i] + (h10 * h) * vs[i] + h01 * xs[i + 1] + (h11 * h) * vs[i + 1];
  }
};

struct ReparamImpl : LiftedCurve::Impl {
  LiftedCurve base;
  std::vector<double> ss, bts;  // arc values and base times, both increasing

  explicit ReparamImpl(LiftedCurve b) : base(std::move(b)) {}

  Vec eval(double s) const override {
    if (s <= ss.front()) return base.at(bts.front());
    if (s >= ss.back()) return base.at(bts.back());
    auto it = std::upper_bound(ss.begin(), ss.end(), s);
    std::size_t i = static_cast<std::size_t>(it - ss.begin()) - 1;
    double u = (s - ss[i]) / (ss[i + 1] - ss[i]);
    return base.at(bts[i] + u * (bts[i + 1] - bts[i]));
  }
};

struct PerturbImpl : LiftedCurve::Impl {
  LiftedCurve base;
  std::vector<std::vector<PerturbTerm>> disp;

  explicit PerturbImpl(LiftedCurve b) : base(std::move(b)) {}

  Vec eval(double t) const override {
    Vec p = base.at(t);
    for (int i = 0; i < dim; ++i)
      for (const auto& term : disp[static_cast<std::size_t>(i)])
        p[i] += term.amp * std::sin(term.omega * t + term.phase);
    return p;
  }
};

}  // namespace

std::optional<LiftedCurve::LinearData> LiftedCurve::linear() const {
  if (auto* a = dynamic_cast<const AnalyticImpl*>(impl_.get())) return a->lin;
  return std::nullopt;
}

LiftedCurve linear_flow_curve(const Vec& v, const Vec& x0, double tMin, double tMax) {
  if (v.size() != x0.size() || v.size() == 0)
    throw StructuralError("linear_flow_curve: dimension mismatch");
  if (v.norm() == 0.0) throw DomainError("linear_flow_curve: zero velocity");
  if (!(tMin < tMax)) throw DomainError("linear_flow_curve: empty domain");
  auto impl = std::make_shared<AnalyticImpl>();
  impl->kind = LiftedCurve::Kind::analytic;
  impl->dim = static_cast<int>(v.size());
  impl->t0 = tMin;
  impl->t1 = tMax;
  impl->note = "linear flow";
  Vec vc = v, xc = x0;
  impl->f = [vc, xc](double t) { return Vec(xc + t * vc); };
  impl->lin = LiftedCurve::LinearData{vc, xc};
  return LiftedCurve(impl);
}

Vec TrigField::eval(const Vec& x) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto& c = comps[static_cast<std::size_t>(i)];
    double v = c.constant;
    for (const auto& term : c.terms) {
      double th = kTwoPi * term.freq.cast<double>().dot(x);
      v += term.cosAmp * std::cos(th) + term.sinAmp * std::sin(th);
    }
    out[i] = v;
  }
  return out;
}

double TrigField::bound() const {
  double s2 = 0.0;
  for (const auto& c : comps) {
    double b = std::abs(c.constant);
    for (const auto& term : c.terms) b += std::hypot(term.cosAmp, term.sinAmp);
    s2 += b * b;
  }
  return std::sqrt(s2);
}

LiftedCurve integrate_flow(const TrigField& field, const Vec& x0, double T, double tol) {
  const int n = field.dim();
  if (n == 0 || x0.size() != n) throw StructuralError("integrate_flow: dimension mismatch");
  for (const auto& c : field.comps)
    for (const auto& term : c.terms)
      if (term.freq.size() != n) throw StructuralError("integrate_flow: bad frequency vector");
  if (!(T > 0.0)) throw DomainError("integrate_flow: horizon must be positive");
  if (!(tol > 0.0) || tol >= 1.0) throw DomainError("integrate_flow: tol outside (0,1)");

  namespace ode = boost::numeric::odeint;
  using state_t = std::vector<double>;

  auto evalField = [&field, n](const state_t& s) {
    Vec x = Eigen::Map<const Vec>(s.data(), n);
    return field.eval(x);
  };

  // one half-axis at a time; sign folds the field for the backward branch
  auto run = [&](double sign, std::vector<double>& ts, std::vector<Vec>& xs) {
    auto sys = [&](const state_t& s, state_t& dsdt, double) {
      Vec v = sign * evalField(s);
      for (int i = 0; i < n; ++i) dsdt[static_cast<std::size_t>(i)] = v[i];
    };
    state_t s(x0.data(), x0.data() + n);
    auto obs = [&](const state_t& st, double t) {
      ts.push_back(t);
      xs.emplace_back(Eigen::Map<const Vec>(st.data(), n));
    };
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<state_t>());
    double dt0 = std::min(0.1, T);
    try {
      ode::integrate_adaptive(stepper, sys, s, 0.0, T, dt0, obs);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "integrate_flow: integration failure (" << e.what() << "); partial trajectory up to t="
          << (ts.empty() ? 0.0 : sign * ts.back());
      throw NumericalError(msg.str());
    }
  };

  std::vector<double> tf, tb;
  std::vector<Vec> xf, xb;
  run(+1.0, tf, xf);
  run(-1.0, tb, xb);

  auto impl = std::make_shared<OdeImpl>();
  impl->kind = LiftedCurve::Kind::ode;
  impl->dim = n;
  impl->t0 = -T;
  impl->t1 = T;
  impl->note = "adaptive flow integration";
  // backward branch reversed into ascending time; skip its t=0 duplicate
  for (std::size_t i = tb.size(); i-- > 1;) {
    impl->ts.push_back(-tb[i]);
    impl->xs.push_back(xb[i]);
  }
  for (std::size_t i = 0; i < tf.size(); ++i) {
    impl->ts.push_back(tf[i]);
    impl->xs.push_back(xf[i]);
  }
  impl->vs.reserve(impl->ts.size());
  for (const auto& x : impl->xs) impl->vs.push_back(field.eval(x));
  return LiftedCurve(impl);
}

LiftedCurve arc_length_reparametrize(const LiftedCurve& curve, const TorusGeometry& geom,
                                     double sampleStep) {
  if (geom.dim() != curve.dim())
    throw StructuralError("arc_length_reparametrize: dimension mismatch");
  if (!(sampleStep > 0.0)) throw DomainError("arc_length_reparametrize: bad sample step");

  if (auto lin = curve.linear(); lin && geom.isFlat()) {
    double speed = geom.flatNorm(lin->v);
    Vec u = lin->v / speed;
    return linear_flow_curve(u, lin->x0, curve.tmin() * speed, curve.tmax() * speed);
  }

  const double t0 = curve.tmin(), t1 = curve.tmax();
  const double span = t1 - t0;
  const std::size_t chords = static_cast<std::size_t>(std::ceil(span / sampleStep));
  if (chords > 50'000'000) throw DomainError("arc_length_reparametrize: domain too long to sample");
  const double h = span / static_cast<double>(chords);

  auto impl = std::make_shared<ReparamImpl>(curve);
  impl->kind = curve.kind();
  impl->dim = curve.dim();
  impl->note = "arc-length reparametrization: " + curve.note();
  impl->bts.reserve(chords + 1);
  impl->ss.reserve(chords + 1);
  double acc = 0.0;
  Vec prev = curve.at(t0);
  impl->bts.push_back(t0);
  impl->ss.push_back(0.0);
  for (std::size_t i = 1; i <= chords; ++i) {
    double t = (i == chords) ? t1 : t0 + static_cast<double>(i) * h;
    Vec p = curve.at(t);
    double flat = geom.flatNorm(p - prev);
    double len = geom.isFlat() ? flat : flat * std::exp(geom.u(0.5 * (p + prev)));
    if (flat / h < 1e-6)
      throw DomainError("arc_length_reparametrize: stationary interval near t=" +
                        std::to_string(t));
    acc += len;
    impl->bts.push_back(t);
    impl->ss.push_back(acc);
    prev = p;
  }
  // anchor arc value 0 at t=0 when the domain straddles it
  double shift = 0.0;
  if (t0 <= 0.0 && 0.0 <= t1) {
    auto it = std::upper_bound(impl->bts.begin(), impl->bts.end(), 0.0);
    std::size_t i = it == impl->bts.begin() ? 0 : static_cast<std::size_t>(it - impl->bts.begin()) - 1;
    if (i + 1 >= impl->bts.size()) i = impl->bts.size() - 2;
    double u = (0.0 - impl->bts[i]) / (impl->bts[i + 1] - impl->bts[i]);
    shift = impl->ss[i] + u * (impl->ss[i + 1] - impl->ss[i]);
  } else {
    shift = impl->ss.front();
  }
  for (auto& s : impl->ss) s -= shift;
  impl->t0 = impl->ss.front();
  impl->t1 = impl->ss.back();
  return LiftedCurve(impl);
}

// ---- counterexample construction -------------------------------------

Vec CounterexampleSpec::a(int n) const {
  Vec w(2);
  w << -n, -n * slope - 1.0 / n;
  return w;
}

Vec CounterexampleSpec::b(int n) const {
  Vec w(2);
  w << n, n * slope - 1.0 / n;
  return w;
}

CounterexampleSchedule counterexample_schedule(const CounterexampleSpec& spec) {
  if (spec.nMax < 1) throw StructuralError("counterexample: nMax must be >= 1");
  if (!(spec.t1 > 0.0) || !(spec.contactRatio > 1.0) || !(spec.travelRatio > 2.0) ||
      !(spec.stallRatio > 1.0))
    throw StructuralError("counterexample: ratios out of range");
  CounterexampleSchedule sched;
  double prevStallEnd = 0.0;
  for (int n = 1; n <= spec.nMax; ++n) {
    CounterexampleSchedule::Epoch e;
    e.n = n;
    e.contactT = (n == 1) ? spec.t1 : prevStallEnd * spec.contactRatio;
    e.travelEndT = e.contactT * spec.travelRatio;
    for (double t = e.contactT; t < e.travelEndT; t *= 2.0) e.rayTimes.push_back(t);
    e.rayTimes.push_back(e.travelEndT);
    e.stallEndT = e.travelEndT * spec.stallRatio;
    prevStallEnd = e.stallEndT;
    sched.epochs.push_back(std::move(e));
  }
  sched.horizon = prevStallEnd;
  return sched;
}

LiftedCurve counterexample_curve(const CounterexampleSpec& spec) {
  auto sched = counterexample_schedule(spec);

  // positive half; the negative half is the mirror t -> -t, b_n -> -a_n
  std::vector<double> ts{0.0};
  std::vector<Vec> ps{Vec::Zero(2)};
  for (const auto& e : sched.epochs) {
    for (double t : e.rayTimes) {
      ts.push_back(t);
      ps.push_back(t * spec.b(e.n));
    }
    ts.push_back(e.stallEndT);
    ps.push_back(e.travelEndT * spec.b(e.n));
  }

  // feasibility: per-epoch speed caps and monotone h along the lift, where
  // h(x) = slope*x_0 - x_1 certifies that every windowed class has h >= 0
  auto h = [&spec](const Vec& p) { return spec.slope * p[0] - p[1]; };
  {
    std::size_t seg = 0;
    for (const auto& e : sched.epochs) {
      double cap = spec.speedCapPerEpoch(e.n);
      std::size_t segsInEpoch = e.rayTimes.size() + 1;
      for (std::size_t k = 0; k < segsInEpoch; ++k, ++seg) {
        double dt = ts[seg + 1] - ts[seg];
        double speed = (ps[seg + 1] - ps[seg]).norm() / dt;
        if (speed > cap) {
          std::ostringstream msg;
          msg << "counterexample_curve: epoch " << e.n << " infeasible: segment speed " << speed
              << " exceeds cap " << cap;
          throw StructuralError(msg.str());
        }
        if (h(ps[seg + 1]) < h(ps[seg]) - 1e-9 * std::abs(h(ps[seg]))) {
          std::ostringstream msg;
          msg << "counterexample_curve: epoch " << e.n << " breaks monotonicity of the slope form";
          throw StructuralError(msg.str());
        }
      }
    }
  }

  // mirrored negative half: at time -t the lift sits at -t*a_n where the
  // positive half sits at t*b_n, so symmetric ray-time windows average to
  // (b_n + a_n)/2 = (0, -1/n) exactly
  std::vector<Vec> neg;
  for (const auto& e : sched.epochs) {
    for (double t : e.rayTimes) neg.push_back(Vec(-t * spec.a(e.n)));
    neg.push_back(Vec(-e.travelEndT * spec.a(e.n)));
  }

  auto impl = std::make_shared<PiecewiseImpl>();
  impl->kind = LiftedCurve::Kind::piecewise;
  impl->dim = 2;
  impl->t0 = -sched.horizon;
  impl->t1 = sched.horizon;
  impl->note = "two-sided stalled ray chase";
  for (std::size_t i = ts.size(); i-- > 1;) {
    impl->ts.push_back(-ts[i]);
    impl->ps.push_back(neg[i - 1]);
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    impl->ts.push_back(ts[i]);
    impl->ps.push_back(ps[i]);
  }
  return LiftedCurve(impl);
}

// ---- axes oscillator --------------------------------------------------

OscillatorSpec OscillatorSpec::geometric(int epochCount, double a0, double growth,
                                         double epsilon) {
  OscillatorSpec spec;
  spec.epsilon = epsilon;
  double amp = a0;
  for (int k = 0; k < epochCount; ++k) {
    spec.epochs.push_back({k % 2, amp});
    if (k % 2 == 1) amp *= growth;
  }
  return spec;
}

OscillatorSchedule oscillator_schedule(const OscillatorSpec& spec) {
  if (spec.epochs.empty()) throw StructuralError("oscillator: no epochs");
  if (!(spec.epsilon > 0.0) || spec.epsilon >= 0.5)
    throw StructuralError("oscillator: corridor width out of range");
  double delta = 0.5 * spec.epsilon;
  OscillatorSchedule sched;
  double t = 0.0;
  for (const auto& e : spec.epochs) {
    if (e.axis != 0 && e.axis != 1) throw StructuralError("oscillator: axis must be 0 or 1");
    if (!(e.amplitude > spec.epsilon)) throw StructuralError("oscillator: amplitude too small");
    double leg = e.amplitude - delta;
    t += leg;
    sched.tipTimes.push_back(t);
    sched.tipAxis.push_back(e.axis);
    t += leg;
  }
  sched.horizon = t;
  return sched;
}

LiftedCurve axes_oscillator_curve(const OscillatorSpec& spec) {
  auto sched = oscillator_schedule(spec);
  double delta = 0.5 * spec.epsilon;
  Vec rest(2);
  rest << delta, delta;

  auto impl = std::make_shared<PiecewiseImpl>();
  impl->kind = LiftedCurve::Kind::piecewise;
  impl->dim = 2;
  impl->t0 = -1e18;  // resting at the corner for all negative time
  impl->t1 = sched.horizon;
  impl->note = "axes oscillator";
  impl->constantBefore = true;
  impl->ts.push_back(0.0);
  impl->ps.push_back(rest);
  for (std::size_t k = 0; k < sched.tipTimes.size(); ++k) {
    Vec tip = rest;
    tip[sched.tipAxis[k]] = spec.epochs[k].amplitude;
    double leg = spec.epochs[k].amplitude - delta;
    impl->ts.push_back(sched.tipTimes[k]);
    impl->ps.push_back(tip);
    impl->ts.push_back(sched.tipTimes[k] + leg);
    impl->ps.push_back(rest);
  }
  return LiftedCurve(impl);
}

LiftedCurve perturb_bounded(const LiftedCurve& curve,
                            const std::vector<std::vector<PerturbTerm>>& displacement,
                            double bound) {
  if (static_cast<int>(displacement.size()) != curve.dim())
    throw StructuralError("perturb_bounded: displacement dimension mismatch");
  double s2 = 0.0;
  for (const auto& coord : displacement) {
    double b = 0.0;
    for (const auto& term : coord) b += std::abs(term.amp);
    s2 += b * b;
  }
  if (std::sqrt(s2) > bound + 1e-12)
    throw DomainError("perturb_bounded: displacement exceeds declared bound");
  auto impl = std::make_shared<PerturbImpl>(curve);
  impl->kind = curve.kind();
  impl->dim = curve.dim();
  impl->t0 = curve.tmin();
  impl->t1 = curve.tmax();
  impl->note = "bounded perturbation: " + curve.note();
  impl->disp = displacement;
  return LiftedCurve(impl);
}

}  // namespace acyc

#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "acyc/common.hpp"
#include "acyc/geometry.hpp"

// Parametrized curves with explicit lifts c~: R -> R^n. Sources: analytic
// formulas, adaptively integrated flows with dense output, and the two
// pathological piecewise constructions (the wild two-sided oscillation with
// prescribed normalized-class targets, and the axes oscillator).

namespace acyc {

class LiftedCurve {
 public:
  enum class Kind { analytic, ode, piecewise };

  struct Impl {
    Kind kind;
    int dim;
    double t0, t1;
    std::string note;
    virtual Vec eval(double t) const = 0;
    virtual ~Impl() = default;
  };

  explicit LiftedCurve(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  Vec at(double t) const {
    if (t < impl_->t0 || t > impl_->t1)
      throw DomainError("LiftedCurve::at: t outside domain");
    return impl_->eval(t);
  }
  double tmin() const { return impl_->t0; }
  double tmax() const { return impl_->t1; }
  int dim() const { return impl_->dim; }
  Kind kind() const { return impl_->kind; }
  const std::string& note() const { return impl_->note; }

  // set for analytic straight-line lifts; enables exact reparametrization
  struct LinearData {
    Vec v, x0;
  };
  std::optional<LinearData> linear() const;

 private:
  std::shared_ptr<const Impl> impl_;
  friend LiftedCurve linear_flow_curve(const Vec&, const Vec&, double, double);
};

// c~(t) = x0 + t v on [tMin, tMax].
LiftedCurve linear_flow_curve(const Vec& v, const Vec& x0, double tMin = -1e18,
                              double tMax = 1e18);

// Trigonometric-polynomial vector fields on T^n: each component is
// const + sum of amp_c cos(2 pi <k,x>) + amp_s sin(2 pi <k,x>).
struct TrigTerm {
  Eigen::VectorXi freq;
  double cosAmp = 0.0;
  double sinAmp = 0.0;
};
struct FieldComponent {
  double constant = 0.0;
  std::vector<TrigTerm> terms;
};
struct TrigField {
  std::vector<FieldComponent> comps;
  int dim() const { return static_cast<int>(comps.size()); }
  Vec eval(const Vec& x) const;
  double bound() const;  // certified sup-norm bound over the torus
};

// Adaptive Runge-Kutta integration of dc~/dt = field(c~) over [-T, T] with
// dense output by cubic Hermite interpolation between accepted steps.
// Deterministic for fixed inputs.
LiftedCurve integrate_flow(const TrigField& field, const Vec& x0, double T, double tol);

// Unit-speed reparametrization anchored at t=0 (arc value 0 there when the
// domain contains 0). Exact closed form for straight lifts on flat tori;
// otherwise a sampled cumulative-length table at sampleStep resolution.
LiftedCurve arc_length_reparametrize(const LiftedCurve& curve, const TorusGeometry& geom,
                                     double sampleStep = 1.0 / 512.0);

// ---- the section-4 wild curve ----------------------------------------
//
// Two-sided piecewise-linear lift on T^2 whose positive end revisits the
// normalized classes b_n = (n, n*slope - 1/n) and negative end a_n =
// (-n, -n*slope - 1/n), both strictly below the line y = slope*x. Epoch n:
// reach the ray t*b_n, travel along it for a factor travelRatio (so the
// one-sided normalized class holds still for over a decade), then stall
// (zero velocity) for a factor stallRatio. The stalls create genuine
// non-balanced cluster points near 0 at finite depth while every windowed
// class keeps h(w) = slope*w_x - w_y >= 0, i.e. stays in the closed lower
// half-plane of classes; h(c~(t)) is nondecreasing in t by construction.
struct CounterexampleSpec {
  double slope = std::numbers::sqrt2;
  int nMax = 10;
  double t1 = 100.0;         // first ray-contact time
  double contactRatio = 1.25;
  double travelRatio = 12.0;
  double stallRatio = 16.0;
  double speedCapPerEpoch(int n) const { return 16.0 * (n + 2); }

  Vec a(int n) const;  // negative-end target
  Vec b(int n) const;  // positive-end target
};

struct CounterexampleSchedule {
  struct Epoch {
    int n;
    double contactT;               // first time on the ray
    std::vector<double> rayTimes;  // times with c~(t) exactly t*b_n (contact..travel end)
    double travelEndT;
    double stallEndT;              // position frozen from travelEndT to here
  };
  std::vector<Epoch> epochs;
  double horizon;  // domain is [-horizon, horizon]
};

CounterexampleSchedule counterexample_schedule(const CounterexampleSpec& spec);
LiftedCurve counterexample_curve(const CounterexampleSpec& spec);

// ---- the axes oscillator ---------------------------------------------
//
// Excursions along +x then +y inside a corridor of width epsilon, each
// returning to the corner rest point; amplitudes grow without bound, the
// negative end rests at the corner. Unit-speed waypoint parametrization.
struct OscillatorSpec {
  struct Epoch {
    int axis;       // 0 = +x, 1 = +y
    double amplitude;
  };
  std::vector<Epoch> epochs;  // amplitudes nondecreasing per axis, unbounded intent
  double epsilon = 0.1;       // corridor width; rest corner at (eps/2, eps/2)

  static OscillatorSpec geometric(int epochCount = 12, double a0 = 3.0, double growth = 3.0,
                                  double epsilon = 0.1);
};

struct OscillatorSchedule {
  std::vector<double> tipTimes;  // time of each excursion tip
  std::vector<int> tipAxis;
  double horizon;
};

OscillatorSchedule oscillator_schedule(const OscillatorSpec& spec);
LiftedCurve axes_oscillator_curve(const OscillatorSpec& spec);

// ---- bounded perturbation --------------------------------------------

// delta_i(t) = sum_j amp sin(omega t + phase); requires the certified sup
// norm of delta to be <= bound.
struct PerturbTerm {
  double omega, amp, phase;
};
LiftedCurve perturb_bounded(const LiftedCurve& curve,
                            const std::vector<std::vector<PerturbTerm>>& displacement,
                            double bound);

}  // namespace acyc

#pragma once

#include <string>
#include <vector>

#include "acyc/common.hpp"
#include "acyc/curves.hpp"

// Calibrating maps Phi: R^n -> R^n with Phi(x + g) = Phi(x) + g for lattice
// vectors g. Increments of Phi along a lifted curve recover windowed homology
// classes without any closing construction.

namespace acyc {

// bump families for the partition construction; support radius must exceed
// 1/2 (covering) while the bump vanishes at every other lattice translate
struct BumpSpec {
  std::string name = "tent";  // "tent" or "cos2"
  double radius = 1.0;        // tent: (1/2, 1]; cos2: fixed support 1
};

class Calibrator {
 public:
  enum class Kind { identity, partition };

  static Calibrator identity(int dim);
  static Calibrator partition(int dim, const BumpSpec& bump, const Vec& basepoint);

  Vec value(const Vec& lift) const;  // Phi(lift), with Phi(basepoint) = 0
  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const BumpSpec& bump() const { return bump_; }
  // sampled Lipschitz estimate for the flat metric (exact 1 for identity);
  // consumers inflate by 1.1 when using it as a bound
  double lipschitz() const { return lipschitz_; }

 private:
  Calibrator() = default;
  Kind kind_ = Kind::identity;
  int dim_ = 0;
  BumpSpec bump_;
  Vec basepoint_;
  Vec baseValue_;  // raw Phi at the basepoint, subtracted from every value
  double lipschitz_ = 1.0;

  Vec rawValue(const Vec& lift) const;
};

// Phi(c~(t)) - Phi(c~(s)), cross-checked against a lattice-shifted lift.
Vec curve_increment(const Calibrator& phi, const LiftedCurve& curve, double s, double t);

// Integer class of a closed loop given lift samples whose endpoints project
// to the same torus point.
IVec loop_class(const Calibrator& phi, const std::vector<Vec>& loopLift);

}  // namespace acyc

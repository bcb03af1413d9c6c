#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Shared vocabulary: real/integer homology vectors in a fixed basis, the
// error taxonomy used across the library, and the sampled point-set type.
//
// Basis conventions, fixed once and used everywhere:
//   H_1(T^n, Z) = Z^n via the coordinate loops e_1..e_n.
//   H_2(T^3, Z) = Z^3 via the coordinate 2-tori ordered (e2^e3, e1^e3, e1^e2).

namespace acyc {

using Vec = Eigen::VectorXd;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using Mat = Eigen::MatrixXd;

// Malformed values or incompatible shapes (caller bug).
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inputs outside an operation's domain (empty sets, bad parameters).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Well-formed request that the numerics could not honor
// (non-transverse crossing, schedule infeasible, no convergence where demanded).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad experiment configuration (unknown fields, wrong types, missing keys).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Vec toReal(const IVec& a) {
  Vec r(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r[i] = static_cast<double>(a[i]);
  return r;
}

// Finite sample of homology vectors, optionally tagged with the (s,t)
// window that produced each point. Provenance rows are either all present
// or all absent.
struct PointSet {
  std::vector<Vec> points;
  std::vector<double> winS;  // same length as points when present
  std::vector<double> winT;

  bool hasProvenance() const { return !winS.empty(); }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  int rank() const {
    if (points.empty()) throw DomainError("PointSet::rank: empty set");
    return static_cast<int>(points.front().size());
  }

  void add(const Vec& p) {
    if (!points.empty() && p.size() != points.front().size())
      throw StructuralError("PointSet::add: rank mismatch");
    if (hasProvenance())
      throw StructuralError("PointSet::add: set carries provenance; use add(p,s,t)");
    points.push_back(p);
  }

  void add(const Vec& p, double s, double t) {
    if (!points.empty() && p.size() != points.front().size())
      throw StructuralError("PointSet::add: rank mismatch");
    if (!points.empty() && !hasProvenance())
      throw StructuralError("PointSet::add: set has no provenance columns");
    points.push_back(p);
    winS.push_back(s);
    winT.push_back(t);
  }
};

}  // namespace acyc

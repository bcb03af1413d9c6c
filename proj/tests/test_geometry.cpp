#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "acyc/geometry.hpp"
#include "oracles.hpp"

using namespace acyc;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Mat diag2(double a, double b) {
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = a;
  g(1, 1) = b;
  return g;
}
}  // namespace

TEST_CASE("project reduces coordinatewise mod 1") {
  Vec p = project(v2(1.25, -0.5));
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(project(v2(0, 0)) == v2(0, 0));
  CHECK(project(v2(3.0, 2.0)) == v2(0, 0));

  // lattice translates are invisible
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5, 5);
  std::uniform_int_distribution<int> Z(-7, 7);
  for (int i = 0; i < 100; ++i) {
    const Vec x = v2(U(rng), U(rng));
    const Vec g = v2(Z(rng), Z(rng));
    CHECK((project(x) - project(Vec(x + g))).norm() < 1e-12);
  }
}

TEST_CASE("shortest_closing: wall crossing and brute-force agreement") {
  const TorusGeometry flat = TorusGeometry::unitFlat(2);
  auto c = shortest_closing(flat, v2(0.9, 0), v2(0.1, 0));
  CHECK(c.flatLength == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(c.displacement[0] == doctest::Approx(0.2));

  auto z = shortest_closing(flat, v2(0.3, 0.7), v2(0.3, 0.7));
  CHECK(z.flatLength == 0.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0, 1);
  const DiameterInfo di = torus_diameter(flat);
  for (int i = 0; i < 10000; ++i) {
    const Vec p = v2(U(rng), U(rng)), q = v2(U(rng), U(rng));
    const auto got = shortest_closing(flat, p, q);
    const double want = oracle::closingBruteForce(flat.gram(), p, q);
    CHECK(std::abs(got.flatLength - want) < 1e-12);
    CHECK(got.flatLength <= di.flat + 1e-12);  // never longer than the diameter
    // reversal symmetry
    CHECK(std::abs(shortest_closing(flat, q, p).flatLength - got.flatLength) < 1e-12);
    // endpoint really projects onto q
    CHECK((project(Vec(got.start + got.displacement)) - q).norm() < 1e-9);
  }
}

TEST_CASE("shortest_closing respects the gram form") {
  const TorusGeometry g(diag2(4, 1));
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const Vec p = v2(U(rng), U(rng)), q = v2(U(rng), U(rng));
    CHECK(std::abs(shortest_closing(g, p, q).flatLength -
                   oracle::closingBruteForce(g.gram(), p, q)) < 1e-12);
  }
}

TEST_CASE("chart_closing stays within one cell diagonal") {
  const TorusGeometry flat = TorusGeometry::unitFlat(2);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Vec p = v2(U(rng), U(rng)), q = v2(U(rng), U(rng));
    const auto c = chart_closing(flat, p, q);
    CHECK(c.flatLength <= std::sqrt(2.0) + 1e-12);
    CHECK((project(Vec(c.start + c.displacement)) - q).norm() < 1e-9);
  }
}

TEST_CASE("path_length: flat exact values") {
  const TorusGeometry flat = TorusGeometry::unitFlat(2);
  CHECK(path_length(flat, {v2(0, 0), v2(3, 4)}) == doctest::Approx(5.0).epsilon(1e-15));
  const TorusGeometry g(diag2(4, 1));
  CHECK(path_length(g, {v2(0, 0), v2(1, 0)}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("path_length: additive under concatenation") {
  const TorusGeometry g(diag2(2, 3), {ConformalTerm{(Eigen::VectorXi(2) << 1, 0).finished(), 0.15}});
  const Vec a = v2(0.1, 0.2), b = v2(0.8, 0.9), c = v2(1.7, 0.4);
  const double whole = path_length(g, {a, b, c}, 1e-4);
  const double parts = path_length(g, {a, b}, 1e-4) + path_length(g, {b, c}, 1e-4);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-14));
}

TEST_CASE("path_length: conformal quadrature against Richardson oracle") {
  // u = 0.1 cos(2 pi x1); length of [(0,0),(1,0)] is the Bessel value I0(0.1)
  const TorusGeometry g(Mat::Identity(2, 2),
                        {ConformalTerm{(Eigen::VectorXi(2) << 1, 0).finished(), 0.1}});
  const double frozen = 1.0025015629340956;  // I0(0.1), derived independently
  const double viaOracle = oracle::segmentLengthRichardson(g, v2(0, 0), v2(1, 0));
  CHECK(viaOracle == doctest::Approx(frozen).epsilon(1e-12));
  const double got = path_length(g, {v2(0, 0), v2(1, 0)}, 1e-4);
  CHECK(got == doctest::Approx(frozen).epsilon(1e-6));

  // random conformal segments agree with the oracle
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  const TorusGeometry h(Mat::Identity(2, 2),
                        {ConformalTerm{(Eigen::VectorXi(2) << 1, 0).finished(), 0.2},
                         ConformalTerm{(Eigen::VectorXi(2) << 0, 2).finished(), -0.1}});
  for (int i = 0; i < 25; ++i) {
    const Vec a = v2(U(rng), U(rng)), b = v2(U(rng), U(rng));
    if ((a - b).norm() < 1e-3) continue;
    CHECK(path_length(h, {a, b}, 1e-4) ==
          doctest::Approx(oracle::segmentLengthRichardson(h, a, b)).epsilon(1e-7));
  }
}

TEST_CASE("torus_diameter: frozen values") {
  CHECK(torus_diameter(TorusGeometry::unitFlat(2)).flat ==
        doctest::Approx(0.7071067811865476).epsilon(1e-15));
  CHECK(torus_diameter(TorusGeometry::unitFlat(2)).c0() ==
        doctest::Approx(1.4142135623730951).epsilon(1e-15));
  CHECK(torus_diameter(TorusGeometry::unitFlat(1)).flat == doctest::Approx(0.5));
  // gram diag(1,9): deep hole at (1/2,1/2), frozen from the brute-force oracle
  CHECK(torus_diameter(TorusGeometry(diag2(1, 9))).flat ==
        doctest::Approx(1.5811388300841898).epsilon(1e-12));
}

TEST_CASE("torus_diameter: non-diagonal gram via grid search") {
  Mat g(2, 2);
  g << 1.0, 0.3, 0.3, 1.0;
  const double d = torus_diameter(TorusGeometry(g)).flat;
  // oracle: dense grid of points, distance to lattice within range 2
  double want = 0.0;
  const int N = 160;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const Vec x = v2((i + 0.5) / N, (j + 0.5) / N);
      want = std::max(want, oracle::closingBruteForce(g, x, v2(0, 0)));
    }
  CHECK(d >= want - 1e-9);          // refinement can only improve on the grid
  CHECK(d <= want + 2.0 / N);       // and cannot beat it by more than a cell
}

TEST_CASE("torus_diameter: conformal upper bound is certified") {
  const TorusGeometry g(Mat::Identity(2, 2),
                        {ConformalTerm{(Eigen::VectorXi(2) << 1, 0).finished(), 0.2}});
  const DiameterInfo di = torus_diameter(g);
  CHECK(di.upper == doctest::Approx(di.flat * std::exp(0.2)).epsilon(1e-12));
  // bound dominates sampled conformal closing lengths
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 500; ++i) {
    const Vec p = v2(U(rng), U(rng)), q = v2(U(rng), U(rng));
    CHECK(shortest_closing(g, p, q).length <= di.upper + 1e-9);
  }
}

TEST_CASE("geometry validation") {
  Mat bad(2, 2);
  bad << 1, 2, 2, 1;  // indefinite
  CHECK_THROWS_AS(TorusGeometry{bad}, StructuralError);
  Mat asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(TorusGeometry{asym}, StructuralError);
}

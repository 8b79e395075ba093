#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wirebend/curve_core.hpp"
#include "wirebend/error.hpp"

using namespace wirebend;

TEST_CASE("rdp agrees with the recursive reference on random curves") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const bool planar = trial % 2 == 0;
    const auto curve = oracle::random_walk(rng, 5 + trial % 60, planar);
    const double eps = 0.001 * (1 + trial % 20);
    const auto got = rdp_simplify_indices(curve, eps);
    const auto want = oracle::rdp(curve, eps);
    REQUIRE(got == want);
  }
}

TEST_CASE("rdp invariants") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto curve = oracle::random_walk(rng, 3 + trial, trial % 3 == 0);
    const double eps = 0.0005 * (1 + trial % 30);
    const auto idx = rdp_simplify_indices(curve, eps);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == curve.size() - 1);
    for (std::size_t k = 1; k < idx.size(); ++k) CHECK(idx[k] > idx[k - 1]);
    CHECK(oracle::max_deviation(curve, idx) <= eps + 1e-12);

    const auto simplified = rdp_simplify(curve, eps);
    CHECK(rdp_simplify(simplified, eps).size() == simplified.size());
  }
}

TEST_CASE("rdp edge cases") {
  using P = Point3;
  CHECK_THROWS_AS(rdp_simplify(std::vector<P>{}, 0.1), Error);
  try {
    rdp_simplify(std::vector<P>{}, 0.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCurve);
  }
  try {
    rdp_simplify(std::vector<P>{P(1, 2, 3)}, 0.1);
    FAIL("expected EmptyCurve");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCurve);
  }
  CHECK(rdp_simplify(std::vector<P>{P(0, 0, 0), P(1, 0, 0)}, 0.1).size() == 2);

  std::vector<P> line;
  for (int i = 0; i < 20; ++i) line.emplace_back(0.1 * i, 0, 0);
  CHECK(rdp_simplify(line, 1e-12).size() == 2);
  CHECK_THROWS_AS(rdp_simplify(line, 0.0), Error);

  std::vector<P> bad{P(0, 0, 0), P(std::nan(""), 0, 0), P(1, 0, 0)};
  try {
    rdp_simplify(bad, 0.1);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
  CHECK_THROWS_AS(rdp_simplify(line, -1.0), Error);
}

TEST_CASE("rdp tie takes the first maximum") {
  std::vector<Point3> c{{0, 0, 0}, {1, 1, 0}, {2, 0, 0}, {3, 1, 0}, {4, 0, 0}};
  // points 1 and 3 are both at distance 1 from the chord
  const auto idx = rdp_simplify_indices(c, 0.5);
  CHECK(idx == std::vector<std::size_t>{0, 1, 2, 3, 4});
  const auto coarse = rdp_simplify_indices(std::vector<Point3>{{0, 0, 0}, {1, 1, 0}, {2, 1, 0}, {3, 0, 0}}, 0.99);
  CHECK(coarse == std::vector<std::size_t>{0, 1, 3});
}

TEST_CASE("bend normals are unit and orthogonal to both incident segments") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = oracle::random_walk(rng, 6, false);
    const auto n = compute_bend_normals(pts);
    REQUIRE(n.size() == pts.size() - 2);
    for (std::size_t i = 0; i < n.size(); ++i) {
      CHECK(std::abs(n[i].norm() - 1.0) < 1e-12);
      CHECK(std::abs(n[i].dot((pts[i + 1] - pts[i]).normalized())) < 1e-9);
      CHECK(std::abs(n[i].dot((pts[i + 2] - pts[i + 1]).normalized())) < 1e-9);
    }
  }
}

TEST_CASE("collinear pivots inherit a neighbour's normal") {
  std::vector<Point3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {2, 1, 0}, {3, 1, 0}};
  const auto n = compute_bend_normals(p);
  REQUIRE(n.size() == 3);
  CHECK((n[0] - n[1]).norm() < 1e-12);
  CHECK(std::abs(n[1].z()) == doctest::Approx(1.0));

  std::vector<Point3> straight{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const auto m = compute_bend_normals(straight);
  CHECK(std::abs(m[0].dot(Vec3::UnitX())) < 1e-12);
  CHECK(m[0].norm() == doctest::Approx(1.0));
}

TEST_CASE("frames are right-handed and orthonormal") {
  const auto f = build_frame(Point3(0, 0, 0), Point3(1, 0, 0), Vec3(0, 0, 1));
  CHECK(f.origin.isApprox(Point3(1, 0, 0)));
  CHECK(f.y_axis.isApprox(Vec3(0, 1, 0)));
  const Mat3 r = f.rotation();
  CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
  CHECK(r.determinant() == doctest::Approx(1.0));

  try {
    build_frame(Point3(1, 0, 0), Point3(1, 0, 0), Vec3(0, 0, 1));
    FAIL("expected DegenerateSegment");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSegment);
  }
  try {
    build_frame(Point3(0, 0, 0), Point3(1, 0, 0), Vec3(1, 0, 0));
    FAIL("expected NonOrthogonalNormal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonOrthogonalNormal);
  }
}

TEST_CASE("small helpers") {
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(0.5) == doctest::Approx(0.5));
  const Vec3 a(1, 0, 0), b(0, 1, 0);
  CHECK((minimal_rotation(a, b) * a - b).norm() < 1e-12);
  CHECK((minimal_rotation(a, -a) * a + a).norm() < 1e-12);
  CHECK(std::abs(canonical_orthogonal(Vec3(0.3, 0.2, 0.9)).dot(Vec3(0.3, 0.2, 0.9))) < 1e-12);
  CHECK(point_segment_distance(Point3(0, 1, 0), Point3(-1, 0, 0), Point3(1, 0, 0)) == doctest::Approx(1.0));
}

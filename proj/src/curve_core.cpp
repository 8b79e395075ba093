#include "wirebend/curve_core.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "wirebend/error.hpp"

namespace wirebend {

namespace {

void require_finite(std::span<const Point3> pts) {
  for (const auto& p : pts) {
    if (!p.allFinite()) throw Error(ErrorCode::NonFinite, "curve contains a non-finite coordinate");
  }
}

}  // namespace

double point_segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

std::vector<std::size_t> rdp_simplify_indices(std::span<const Point3> curve, double epsilon) {
  if (curve.size() < 2) throw Error(ErrorCode::EmptyCurve, "need at least 2 points");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  require_finite(curve);

  std::vector<bool> keep(curve.size(), false);
  keep.front() = keep.back() = true;

  std::vector<std::pair<std::size_t, std::size_t>> stack;
  stack.emplace_back(0, curve.size() - 1);
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    if (last <= first + 1) continue;

    double max_dist = -1.0;
    std::size_t index = first;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d = point_segment_distance(curve[i], curve[first], curve[last]);
      if (d > max_dist) {
        max_dist = d;
        index = i;
      }
    }
    if (max_dist > epsilon) {
      keep[index] = true;
      // Right half pushed first so the left half is processed first; the
      // result does not depend on the order.
      stack.emplace_back(index, last);
      stack.emplace_back(first, index);
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

std::vector<Point3> rdp_simplify(std::span<const Point3> curve, double epsilon) {
  std::vector<Point3> out;
  for (std::size_t i : rdp_simplify_indices(curve, epsilon)) out.push_back(curve[i]);
  return out;
}

Vec3 canonical_orthogonal(const Vec3& v) {
  const Vec3 dir = v.normalized();
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = 1.0;
    const Vec3 r = e - e.dot(dir) * dir;
    if (r.norm() > 1e-6) return r.normalized();
  }
  return Vec3::UnitZ();
}

std::vector<Vec3> compute_bend_normals(std::span<const Point3> pivots) {
  if (pivots.size() < 3) throw Error(ErrorCode::TooFewPoints, "need at least 3 pivots");
  require_finite(pivots);

  const std::size_t count = pivots.size() - 2;
  std::vector<std::optional<Vec3>> raw(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Vec3 a = pivots[k + 1] - pivots[k];
    const Vec3 b = pivots[k + 2] - pivots[k + 1];
    const Vec3 c = a.cross(b);
    if (c.norm() >= 1e-9 * a.norm() * b.norm()) raw[k] = c.normalized();
  }

  std::optional<Vec3> first_valid;
  for (const auto& n : raw) {
    if (n) {
      first_valid = n;
      break;
    }
  }
  const Vec3 fallback = first_valid ? *first_valid : canonical_orthogonal(pivots[1] - pivots[0]);

  std::vector<Vec3> normals(count);
  Vec3 carry = fallback;
  for (std::size_t k = 0; k < count; ++k) {
    if (raw[k]) carry = *raw[k];
    normals[k] = carry;
  }
  return normals;
}

PivotChain make_pivot_chain(std::vector<Point3> pivots) {
  PivotChain chain;
  chain.normals = compute_bend_normals(pivots);
  chain.pivots = std::move(pivots);
  return chain;
}

BendFrame build_frame(const Point3& p_prev, const Point3& p_cur, const Vec3& n_prev) {
  const Vec3 seg = p_cur - p_prev;
  const double len = seg.norm();
  if (!(len > 1e-12)) throw Error(ErrorCode::DegenerateSegment, "coincident frame points");
  const Vec3 x = seg / len;
  if (std::abs(n_prev.norm() - 1.0) > 1e-6 || std::abs(n_prev.dot(x)) > 1e-6) {
    throw Error(ErrorCode::NonOrthogonalNormal, "normal is not a unit vector orthogonal to the segment");
  }
  // Re-orthonormalise so the triad is exact to machine precision.
  const Vec3 z = (n_prev - n_prev.dot(x) * x).normalized();
  return BendFrame{p_cur, x, z.cross(x), z};
}

Mat3 minimal_rotation(const Vec3& a, const Vec3& b) {
  const Vec3 ua = a.normalized();
  const Vec3 ub = b.normalized();
  const double c = ua.dot(ub);
  if (c < -1.0 + 1e-12) {
    return Eigen::AngleAxisd(std::numbers::pi, canonical_orthogonal(ua)).toRotationMatrix();
  }
  return Eigen::Quaterniond::FromTwoVectors(ua, ub).toRotationMatrix();
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace wirebend

#include "wirebend/collision.hpp"

#include <cmath>

namespace wirebend {

Aabb bounds(const Shape& s) {
  Aabb box;
  std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Box>) {
          const Vec3 extent = shape.pose.linear().cwiseAbs() * shape.half_extents;
          box.extend(shape.pose.translation() - extent);
          box.extend(shape.pose.translation() + extent);
        } else if constexpr (std::is_same_v<T, Capsule>) {
          box.extend(shape.a);
          box.extend(shape.b);
          box = box.inflated(shape.radius);
        } else {
          box.extend(shape.center);
          box = box.inflated(shape.radius);
        }
      },
      s);
  return box;
}

Shape transformed(const Shape& s, const Pose& t) {
  return std::visit(
      [&](const auto& shape) -> Shape {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Box>) {
          return Box{t * shape.pose, shape.half_extents};
        } else if constexpr (std::is_same_v<T, Capsule>) {
          return Capsule{t * shape.a, t * shape.b, shape.radius};
        } else {
          return Sphere{t * shape.center, shape.radius};
        }
      },
      s);
}

// Closest points between two segments (Ericson, Real-Time Collision
// Detection, 5.1.9).
double segment_segment_distance(const Point3& p1, const Point3& q1, const Point3& p2, const Point3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double eps = 1e-18;
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

double point_box_distance(const Point3& p, const Box& box) {
  const Vec3 local = box.pose.inverse() * p;
  const Vec3 excess = (local.cwiseAbs() - box.half_extents).cwiseMax(0.0);
  return excess.norm();
}

namespace {

bool segment_hits_box(const Vec3& a, const Vec3& b, const Vec3& half) {
  // Slab test in box-local coordinates.
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = b - a;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (std::abs(a[k]) > half[k]) return false;
      continue;
    }
    double ta = (-half[k] - a[k]) / d[k];
    double tb = (half[k] - a[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

double segment_box_distance(const Point3& a, const Point3& b, const Box& box) {
  const Pose inv = box.pose.inverse();
  const Vec3 la = inv * a;
  const Vec3 lb = inv * b;
  if (segment_hits_box(la, lb, box.half_extents)) return 0.0;
  // Distance to a convex set is convex along the segment.
  auto dist = [&](double t) {
    const Vec3 p = la + t * (lb - la);
    return (p.cwiseAbs() - box.half_extents).cwiseMax(0.0).norm();
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (dist(m1) < dist(m2)) hi = m2; else lo = m1;
  }
  return std::min({dist(0.5 * (lo + hi)), dist(0.0), dist(1.0)});
}

}  // namespace

double segment_shape_distance(const Point3& a, const Point3& b, const Shape& s) {
  return std::visit(
      [&](const auto& shape) -> double {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Box>) {
          return segment_box_distance(a, b, shape);
        } else if constexpr (std::is_same_v<T, Capsule>) {
          return std::max(0.0, segment_segment_distance(a, b, shape.a, shape.b) - shape.radius);
        } else {
          return std::max(0.0, point_segment_distance(shape.center, a, b) - shape.radius);
        }
      },
      s);
}

BodySet::BodySet(std::vector<CollisionBody> bodies) {
  for (auto& b : bodies) add(std::move(b));
}

void BodySet::add(CollisionBody body) {
  aabbs_.push_back(bounds(body.shape));
  bodies_.push_back(std::move(body));
}

}  // namespace wirebend

#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "wirebend/curve_core.hpp"

namespace wirebend {

struct Box {
  Pose pose = Pose::Identity();  // box center and orientation
  Vec3 half_extents = Vec3::Constant(0.5);
};

struct Capsule {
  Point3 a = Point3::Zero();
  Point3 b = Point3::Zero();
  double radius = 0.0;
};

struct Sphere {
  Point3 center = Point3::Zero();
  double radius = 0.0;
};

using Shape = std::variant<Box, Capsule, Sphere>;

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Point3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Aabb inflated(double r) const { return {lo.array() - r, hi.array() + r}; }
  bool overlaps(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
};

struct CollisionBody {
  std::string name;
  Shape shape;
  // Machine rollers are contact elements; the simulator masks them near the
  // active bend.
  bool roller = false;
};

Aabb bounds(const Shape& s);
Shape transformed(const Shape& s, const Pose& t);

double segment_segment_distance(const Point3& p0, const Point3& p1, const Point3& q0, const Point3& q1);
double point_box_distance(const Point3& p, const Box& box);

/// Distance between segment [a, b] and the solid shape (0 when touching or
/// overlapping).
double segment_shape_distance(const Point3& a, const Point3& b, const Shape& s);

/// Solid shapes as a list with cached bounds.
class BodySet {
 public:
  BodySet() = default;
  explicit BodySet(std::vector<CollisionBody> bodies);

  void add(CollisionBody body);
  const std::vector<CollisionBody>& bodies() const { return bodies_; }
  const std::vector<Aabb>& boxes() const { return aabbs_; }
  std::size_t size() const { return bodies_.size(); }

 private:
  std::vector<CollisionBody> bodies_;
  std::vector<Aabb> aabbs_;
};

}  // namespace wirebend

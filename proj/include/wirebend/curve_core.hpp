#pragma once

#include <Eigen/Geometry>
#include <span>
#include <vector>

namespace wirebend {

using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Pose = Eigen::Isometry3d;

/// Polyline produced by simplification: pivots plus one unit bend-plane
/// normal per interior pivot.
struct PivotChain {
  std::vector<Point3> pivots;
  std::vector<Vec3> normals;
};

/// Right-handed local frame attached to a bend pivot.
struct BendFrame {
  Point3 origin;
  Vec3 x_axis;
  Vec3 y_axis;
  Vec3 z_axis;

  Mat3 rotation() const {
    Mat3 r;
    r.col(0) = x_axis;
    r.col(1) = y_axis;
    r.col(2) = z_axis;
    return r;
  }
};

// Distance from p to the closed segment [a, b].
double point_segment_distance(const Point3& p, const Point3& a, const Point3& b);

/// Iterative Ramer-Douglas-Peucker. Returns the retained subsequence of
/// `curve` (always including both endpoints). Deviation is measured as
/// point-to-segment distance so every dropped point lies within `epsilon`
/// of the simplified polyline.
std::vector<Point3> rdp_simplify(std::span<const Point3> curve, double epsilon);

/// Same as rdp_simplify but returns indices into the input.
std::vector<std::size_t> rdp_simplify_indices(std::span<const Point3> curve, double epsilon);

/// Unit normals of the bend planes at interior pivots. Near-collinear pivots
/// take the previous valid normal (leading ones take the first valid normal);
/// a fully collinear chain gets a canonical vector orthogonal to the first
/// segment.
std::vector<Vec3> compute_bend_normals(std::span<const Point3> pivots);

PivotChain make_pivot_chain(std::vector<Point3> pivots);

BendFrame build_frame(const Point3& p_prev, const Point3& p_cur, const Vec3& n_prev);

/// v minus its component along the unit plane normal.
inline Vec3 project_onto_plane(const Vec3& v, const Vec3& unit_normal) {
  return v - v.dot(unit_normal) * unit_normal;
}

// Any unit vector orthogonal to `v` picked from the canonical basis.
Vec3 canonical_orthogonal(const Vec3& v);

// Rotation taking unit vector a onto unit vector b with minimal angle.
Mat3 minimal_rotation(const Vec3& a, const Vec3& b);

double wrap_angle(double a);

}  // namespace wirebend

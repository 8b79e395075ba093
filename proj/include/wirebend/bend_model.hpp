#pragma once

#include <numbers>
#include <utility>
#include <vector>

#include "wirebend/curve_core.hpp"

namespace wirebend {

struct WireSpec {
  double diameter = 0.0016;
  // 0 means "exactly the developed length of the target shape".
  double total_length = 0.0;
};

/// One bend {q, theta, alpha, beta} expressed in the frame of the preceding
/// bend. Angles in radians, lengths in meters.
struct BendCandidate {
  int index = 0;
  // Source pivot in the chain, -1 for synthetic candidates.
  int pivot = -1;
  // Bend start point in the predecessor frame. The frame origin is the
  // predecessor pivot (the wire start for the first bend), so q = (d, 0, 0)
  // with d the straight feed length from that pivot.
  Point3 q = Point3::Zero();
  double theta = 0.0;  // interior angle of the xy-projected outgoing leg
  double alpha = 0.0;  // twist about the incoming axis, signed by the z component
  double beta = 0.0;   // lift in the xz plane, signed by the z component
  int side = 1;        // sign of the outgoing leg's y component (theta is unsigned)
  // Derived quantities kept alongside the four parameters.
  double turn = 0.0;       // true turn angle between incoming and outgoing legs
  double tangent = 0.0;    // r_c * tan(turn / 2)
  double arclength = 0.0;  // position of q along the unbent wire
  Point3 q_world = Point3::Zero();
};

struct BendSet {
  std::vector<BendCandidate> candidates;
  double r_c = 0.01;
  WireSpec wire;
  // Normal seeding the first frame (z axis of the first bend's frame).
  Vec3 reference_normal = Vec3::UnitZ();
  // Straight length after the last pivot.
  double tail_length = 0.0;

  std::size_t size() const { return candidates.size(); }
};

struct BendOptions {
  double min_bend_angle = 0.5 * std::numbers::pi / 180.0;
};

/// Outgoing unit direction expressed in a bend frame -> candidate angles.
void set_angles_from_direction(BendCandidate& c, const Vec3& u_local);

/// Outgoing direction in the local frame from (turn, alpha).
Vec3 direction_from_twist(const BendCandidate& c);

/// Outgoing direction from (theta, beta, side); empty when the lift
/// decomposition is singular for this bend.
bool direction_from_lift(const BendCandidate& c, Vec3& out);

BendSet compute_bending_set(const PivotChain& chain, double r_c, const WireSpec& wire,
                            const BendOptions& opts = {});

/// Walks the frame chain and rebuilds pivots, seeds included. Both angle
/// branches are evaluated where non-degenerate and must agree.
std::vector<Point3> reconstruct_pivots(const BendSet& bends,
                                       const std::pair<Point3, Point3>& first_segment);

/// Recomputes tangent lengths and arclength positions from q, turn and r_c.
/// Throws TangentOverlap when a bend starts inside the previous arc.
void update_arclengths(BendSet& bends);

double developed_length(const BendSet& bends);

struct Flange {
  double before = 0.0;
  double after = 0.0;
};

std::vector<Flange> flange_lengths(const BendSet& bends, const WireSpec& wire);

/// Cumulative material roll of each bend relative to the unbent wire frame.
std::vector<double> material_rolls(const BendSet& bends);

}  // namespace wirebend

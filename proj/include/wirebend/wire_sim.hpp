#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wirebend/bend_model.hpp"
#include "wirebend/collision.hpp"

namespace wirebend {

/// Straight segment or circular arc of the wire centerline. Every primitive
/// carries the material frame at its start (column 0 is the tangent) so rolls
/// stay well defined across bends.
struct WirePrimitive {
  enum class Kind { Segment, Arc };

  Kind kind = Kind::Segment;
  Point3 start = Point3::Zero();
  Mat3 frame = Mat3::Identity();
  double length = 0.0;
  double radius = 0.0;                 // arcs only
  Vec3 side = Vec3::UnitY();           // arcs only: unit vector from start toward the center

  Point3 point_at(double s) const;
  Mat3 frame_at(double s) const;
  Point3 end() const { return point_at(length); }
  Vec3 tangent() const { return frame.col(0); }

  Point3 center() const { return start + radius * side; }
  Vec3 axis() const { return frame.col(0).cross(side); }
  // Arc view: angles measured from the start radius vector about axis().
  double start_angle() const { return 0.0; }
  double end_angle() const { return kind == Kind::Arc ? length / radius : 0.0; }
};

struct WireState {
  std::vector<WirePrimitive> primitives;
  double diameter = 0.0016;
  Pose pose = Pose::Identity();  // world from wire coordinates

  static WireState straight(double length, double diameter);

  double length() const;
  // Locate arclength s (clamped to the wire): primitive index and local offset.
  std::pair<std::size_t, double> locate(double s) const;
  Point3 point_at(double s) const;
  Mat3 frame_at(double s) const;
  std::size_t arc_count() const;
};

/// Polyline approximation of an arclength range in world coordinates. Arcs
/// are split so the chord sagitta stays below `chord_tolerance`.
struct WireSamples {
  std::vector<Point3> points;
  std::vector<double> arclength;
};
WireSamples sample_wire(const WireState& wire, double s0, double s1, double chord_tolerance = 1e-4);

/// Continuity and conservation checks used by tests and replay.
double max_position_gap(const WireState& wire);
double max_tangent_gap(const WireState& wire);

enum class BendDirection { CW, CCW };

const char* to_string(BendDirection d);

struct MachineModel {
  Pose frame = Pose::Identity();  // world from machine; bending plane is machine z = 0
  double center_radius = 0.008;
  double roller_gap = 0.004;      // clearance between center roller and die/punch surfaces
  double roller_half_height = 0.01;
  double die_offset = 0.025;
  double die_radius = 0.005;
  double punch_offset = 0.02;
  double punch_radius = 0.005;
  double cw_limit = 150.0 * std::numbers::pi / 180.0;
  double ccw_limit = 150.0 * std::numbers::pi / 180.0;
  double contact_slack = 0.0005;
  Box housing{Pose(Eigen::Translation3d(0.0, 0.0, -0.06)), Vec3(0.06, 0.06, 0.05)};

  double bend_radius(double diameter) const { return center_radius + 0.5 * diameter; }
  double punch_orbit_radius() const;
  void validate() const;
};

struct Environment {
  std::vector<CollisionBody> bodies;  // world frame
  double table_height = 0.0;
};

/// Bend expressed on the wire itself: start arclength, side roll relative
/// to the material frame at that point, turn angle and arc radius.
struct BendAction {
  int index = 0;
  double arclength = 0.0;
  double roll = 0.0;
  double turn = 0.0;
  double radius = 0.0;

  double end() const { return arclength + radius * turn; }
};

std::vector<BendAction> bend_actions(const BendSet& bends);

/// Replaces [s, s + radius * sweep] with an arc bending toward `side` and
/// carries everything after it rigidly. The upstream part stays put in wire
/// coordinates; `downstream_motion` receives the rigid map applied to the rest.
WireState wind_arc(const WireState& wire, double s, const Vec3& side, double sweep, double radius,
                   Pose* downstream_motion = nullptr);

WireState apply_bend(const WireState& wire, const BendAction& bend);

/// Bend side vector in wire coordinates for an action.
Vec3 bend_side(const WireState& wire, const BendAction& bend);

WireState pose_wire_for_bend(const WireState& wire, const BendAction& bend, const MachineModel& machine,
                             bool use_alpha, BendDirection direction, const Environment& env);

enum class ContactVerdict { Feasible, NoPunchContact, NoDieContact };

const char* to_string(ContactVerdict v);

ContactVerdict check_contact_feasibility(const WireState& posed, const BendAction& bend,
                                         const MachineModel& machine, bool use_alpha,
                                         BendDirection direction);

double max_feasible_angle(double wire_diameter, const MachineModel& machine, BendDirection direction);

/// Punch rotation at which the punch roller first touches the die roller on
/// the fixed side. Defines the zero-thickness geometric range.
double punch_die_tangency_stroke(const MachineModel& machine);

struct SimOptions {
  double clearance = 0.001;
  double sweep_step = 1.0 * std::numbers::pi / 180.0;
  double stop_tolerance = 1e-4;
  double chord_tolerance = 1e-4;
};

struct SimResult {
  WireState wire;
  double achieved_angle = 0.0;
  bool stopped_early = false;
  std::string blocking_body;
};

SimResult simulate_bend(const WireState& posed, const BendAction& bend, BendDirection direction, bool use_alpha,
                        const MachineModel& machine, const Environment& env, const SimOptions& opts = {});

/// Static machine bodies (housing, rollers) in world coordinates. The punch
/// sits at its contact position for `direction`, advanced by `punch_angle`.
std::vector<CollisionBody> machine_bodies(const MachineModel& machine, double wire_diameter,
                                          std::optional<BendDirection> direction = std::nullopt,
                                          double punch_angle = 0.0);

bool wire_collides(const WireState& wire, const Environment& env, double clearance,
                   double chord_tolerance = 1e-4);

/// Arclength ranges a posed wire occupies on the fixed and moving side of a
/// bend.
struct BendSides {
  double fixed_lo, fixed_hi, moving_lo, moving_hi;
};
BendSides bend_sides(const WireState& wire, const BendAction& bend, bool use_alpha);

/// Collision check used by the planner: machine rollers are ignored within
/// the contact window around the bend.
bool posed_wire_collides(const WireState& posed, const BendAction& bend, bool use_alpha,
                         const MachineModel& machine, const Environment& env, BendDirection direction,
                         double punch_angle, double clearance, double chord_tolerance,
                         std::string* hit = nullptr);

}  // namespace wirebend

#include "wirebend/wire_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wirebend/error.hpp"

namespace wirebend {

namespace {

Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

WirePrimitive sub_primitive(const WirePrimitive& p, double from, double to) {
  WirePrimitive out = p;
  out.start = p.point_at(from);
  out.frame = p.frame_at(from);
  out.length = to - from;
  if (p.kind == WirePrimitive::Kind::Arc) out.side = rotation_about(p.axis(), from / p.radius) * p.side;
  return out;
}

void transform_primitive(WirePrimitive& p, const Pose& t) {
  p.start = t * p.start;
  p.frame = t.linear() * p.frame;
  p.side = t.linear() * p.side;
}

double ys_of(BendDirection d) { return d == BendDirection::CCW ? 1.0 : -1.0; }

}  // namespace

Point3 WirePrimitive::point_at(double s) const {
  if (kind == Kind::Segment) return start + s * frame.col(0);
  const Point3 c = center();
  return c + rotation_about(axis(), s / radius) * (start - c);
}

Mat3 WirePrimitive::frame_at(double s) const {
  if (kind == Kind::Segment) return frame;
  return rotation_about(axis(), s / radius) * frame;
}

WireState WireState::straight(double length, double diameter) {
  if (!(length > 0.0) || !(diameter > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "wire length and diameter must be positive");
  }
  WireState w;
  w.diameter = diameter;
  WirePrimitive seg;
  seg.length = length;
  w.primitives.push_back(seg);
  return w;
}

double WireState::length() const {
  double total = 0.0;
  for (const auto& p : primitives) total += p.length;
  return total;
}

std::pair<std::size_t, double> WireState::locate(double s) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < primitives.size(); ++k) {
    const double len = primitives[k].length;
    if (s <= acc + len || k + 1 == primitives.size()) return {k, std::clamp(s - acc, 0.0, len)};
    acc += len;
  }
  return {0, 0.0};
}

Point3 WireState::point_at(double s) const {
  const auto [k, local] = locate(s);
  return primitives[k].point_at(local);
}

Mat3 WireState::frame_at(double s) const {
  const auto [k, local] = locate(s);
  return primitives[k].frame_at(local);
}

std::size_t WireState::arc_count() const {
  std::size_t n = 0;
  for (const auto& p : primitives) n += p.kind == WirePrimitive::Kind::Arc;
  return n;
}

WireSamples sample_wire(const WireState& wire, double s0, double s1, double chord_tolerance) {
  WireSamples out;
  double acc = 0.0;
  for (const auto& p : wire.primitives) {
    const double c0 = acc, c1 = acc + p.length;
    acc = c1;
    const double a = std::max(c0, s0), b = std::min(c1, s1);
    if (b < a) continue;
    int pieces = 1;
    if (p.kind == WirePrimitive::Kind::Arc) {
      const double ratio = std::clamp(1.0 - chord_tolerance / p.radius, -1.0, 1.0);
      const double max_step = std::max(2.0 * std::acos(ratio), 1e-3);
      pieces = std::max(1, static_cast<int>(std::ceil((b - a) / p.radius / max_step)));
    }
    for (int i = 0; i <= pieces; ++i) {
      const double s = a + (b - a) * i / pieces;
      if (!out.arclength.empty() && s - out.arclength.back() < 1e-12) continue;
      out.points.push_back(wire.pose * p.point_at(s - c0));
      out.arclength.push_back(s);
    }
  }
  return out;
}

double max_position_gap(const WireState& wire) {
  double gap = 0.0;
  for (std::size_t k = 1; k < wire.primitives.size(); ++k) {
    gap = std::max(gap, (wire.primitives[k - 1].end() - wire.primitives[k].start).norm());
  }
  return gap;
}

double max_tangent_gap(const WireState& wire) {
  double gap = 0.0;
  for (std::size_t k = 1; k < wire.primitives.size(); ++k) {
    const auto& prev = wire.primitives[k - 1];
    const Vec3 t0 = prev.frame_at(prev.length).col(0);
    const Vec3 t1 = wire.primitives[k].tangent();
    gap = std::max(gap, std::atan2(t0.cross(t1).norm(), t0.dot(t1)));
  }
  return gap;
}

const char* to_string(BendDirection d) { return d == BendDirection::CW ? "CW" : "CCW"; }

const char* to_string(ContactVerdict v) {
  switch (v) {
    case ContactVerdict::Feasible: return "Feasible";
    case ContactVerdict::NoPunchContact: return "NoPunchContact";
    case ContactVerdict::NoDieContact: return "NoDieContact";
  }
  return "Unknown";
}

double MachineModel::punch_orbit_radius() const {
  return std::hypot(punch_offset, center_radius + roller_gap + punch_radius);
}

void MachineModel::validate() const {
  const bool ok = center_radius > 0.0 && roller_gap > 0.0 && roller_half_height > 0.0 && die_offset > 0.0 &&
                  die_radius > 0.0 && punch_offset > 0.0 && punch_radius > 0.0 && cw_limit > 0.0 &&
                  ccw_limit > 0.0 && cw_limit <= 2.0 * std::numbers::pi &&
                  ccw_limit <= 2.0 * std::numbers::pi && contact_slack >= 0.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "invalid machine geometry");
}

std::vector<BendAction> bend_actions(const BendSet& bends) {
  std::vector<BendAction> out;
  const auto rolls = material_rolls(bends);
  for (std::size_t k = 0; k < bends.candidates.size(); ++k) {
    const auto& c = bends.candidates[k];
    out.push_back(BendAction{static_cast<int>(k), c.arclength, rolls[k], c.turn, bends.r_c});
  }
  return out;
}

WireState wind_arc(const WireState& wire, double s, const Vec3& side, double sweep, double radius,
                   Pose* downstream_motion) {
  const double total = wire.length();
  s = std::clamp(s, 0.0, total);
  const double arc_len = std::min(radius * sweep, total - s);
  if (downstream_motion) downstream_motion->setIdentity();
  if (arc_len <= 1e-12) return wire;
  const double s_end = s + arc_len;

  const Point3 q = wire.point_at(s);
  const Mat3 f = wire.frame_at(s);
  const Vec3 t = f.col(0);
  Vec3 b = side - side.dot(t) * t;
  if (b.norm() < 1e-12) throw Error(ErrorCode::InvalidArgument, "bend side parallel to the wire tangent");
  b.normalize();

  WirePrimitive arc;
  arc.kind = WirePrimitive::Kind::Arc;
  arc.start = q;
  arc.frame = f;
  arc.length = arc_len;
  arc.radius = radius;
  arc.side = b;

  const Point3 old_end = wire.point_at(s_end);
  const Mat3 old_frame = wire.frame_at(s_end);
  Pose motion = Pose::Identity();
  motion.linear() = arc.frame_at(arc_len) * old_frame.transpose();
  motion.translation() = arc.end() - motion.linear() * old_end;

  WireState out;
  out.diameter = wire.diameter;
  out.pose = wire.pose;
  double acc = 0.0;
  bool arc_placed = false;
  for (const auto& p : wire.primitives) {
    const double c0 = acc, c1 = acc + p.length;
    acc = c1;
    if (std::min(c1, s) - c0 > 1e-12) out.primitives.push_back(sub_primitive(p, 0.0, std::min(c1, s) - c0));
    if (!arc_placed && c1 >= s_end - 1e-15) {
      out.primitives.push_back(arc);
      arc_placed = true;
    }
    if (c1 - std::max(c0, s_end) > 1e-12) {
      auto tail = sub_primitive(p, std::max(c0, s_end) - c0, p.length);
      transform_primitive(tail, motion);
      out.primitives.push_back(tail);
    }
  }
  if (!arc_placed) out.primitives.push_back(arc);
  if (downstream_motion) *downstream_motion = motion;
  return out;
}

Vec3 bend_side(const WireState& wire, const BendAction& bend) {
  const Mat3 f = wire.frame_at(bend.arclength);
  return f * Vec3(0.0, std::cos(bend.roll), std::sin(bend.roll));
}

WireState apply_bend(const WireState& wire, const BendAction& bend) {
  return wind_arc(wire, bend.arclength, bend_side(wire, bend), bend.turn, bend.radius);
}

BendSides bend_sides(const WireState& wire, const BendAction& bend, bool use_alpha) {
  const double total = wire.length();
  const double s = std::clamp(bend.arclength, 0.0, total);
  const double e = std::min(bend.end(), total);
  if (use_alpha) return {0.0, s, s, total};
  return {e, total, 0.0, e};
}

WireState pose_wire_for_bend(const WireState& wire, const BendAction& bend, const MachineModel& machine,
                             bool use_alpha, BendDirection direction, const Environment& env) {
  const double ys = ys_of(direction);
  const Vec3 side = bend_side(wire, bend);
  const Mat3 f = wire.frame_at(bend.arclength);

  double anchor = bend.arclength;
  Vec3 feed = Vec3::UnitX();
  Mat3 anchor_frame = f;
  if (!use_alpha) {
    anchor = std::min(bend.end(), wire.length());
    anchor_frame = wire.frame_at(anchor);
    feed = -Vec3::UnitX();
  }
  const Vec3 t = anchor_frame.col(0);
  Vec3 b = anchor_frame * (f.transpose() * side);
  b = (b - b.dot(t) * t).normalized();

  Mat3 src, dst;
  src << t, b, t.cross(b);
  const Vec3 toward_center = ys * Vec3::UnitY();
  dst << feed, toward_center, feed.cross(toward_center);

  Pose wire_to_machine = Pose::Identity();
  wire_to_machine.linear() = dst * src.transpose();
  wire_to_machine.translation() = Point3(0.0, -ys * bend.radius, 0.0) - wire_to_machine.linear() * wire.point_at(anchor);

  WireState posed = wire;
  posed.pose = machine.frame * wire_to_machine;

  const auto samples = sample_wire(posed, 0.0, posed.length());
  for (const auto& p : samples.points) {
    if (p.z() < env.table_height) {
      throw Error(ErrorCode::UnreachablePose, "placement puts the wire below the table plane");
    }
  }
  return posed;
}

namespace {

double min_axis_distance(const WireState& posed_in_machine, double lo, double hi, const Point3& axis_a,
                         const Point3& axis_b) {
  const auto samples = sample_wire(posed_in_machine, lo, hi);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < samples.points.size(); ++k) {
    best = std::min(best, segment_segment_distance(samples.points[k - 1], samples.points[k], axis_a, axis_b));
  }
  if (samples.points.size() == 1) best = point_segment_distance(samples.points[0], axis_a, axis_b);
  return best;
}

}  // namespace

ContactVerdict check_contact_feasibility(const WireState& posed, const BendAction& bend,
                                         const MachineModel& machine, bool use_alpha,
                                         BendDirection direction) {
  const double ys = ys_of(direction);
  const double h = machine.roller_half_height;
  const double d = posed.diameter;
  WireState local = posed;
  local.pose = machine.frame.inverse() * posed.pose;
  const auto sides = bend_sides(posed, bend, use_alpha);

  const double yp = -ys * (machine.center_radius + machine.roller_gap + machine.punch_radius);
  const double punch_reach = machine.punch_radius + machine.roller_gap - 0.5 * d + machine.contact_slack;
  if (min_axis_distance(local, sides.moving_lo, sides.moving_hi, Point3(machine.punch_offset, yp, -h),
                        Point3(machine.punch_offset, yp, h)) > punch_reach) {
    return ContactVerdict::NoPunchContact;
  }

  const double yd = -ys * (machine.center_radius + machine.roller_gap + machine.die_radius);
  const double die_reach = machine.die_radius + machine.roller_gap - 0.5 * d + machine.contact_slack;
  if (min_axis_distance(local, sides.fixed_lo, sides.fixed_hi, Point3(-machine.die_offset, yd, -h),
                        Point3(-machine.die_offset, yd, h)) > die_reach) {
    return ContactVerdict::NoDieContact;
  }
  return ContactVerdict::Feasible;
}

double punch_die_tangency_stroke(const MachineModel& machine) {
  const double yp = machine.center_radius + machine.roller_gap + machine.punch_radius;
  const double yd = machine.center_radius + machine.roller_gap + machine.die_radius;
  const Eigen::Vector2d punch0(machine.punch_offset, -yp);
  const Eigen::Vector2d die(-machine.die_offset, -yd);
  const double touch = machine.punch_radius + machine.die_radius;
  auto gap = [&](double gamma) {
    const Eigen::Vector2d p = Eigen::Rotation2Dd(gamma) * punch0;
    return (p - die).norm() - touch;
  };
  if (gap(0.0) <= 0.0) return 0.0;
  const double step = 0.25 * std::numbers::pi / 180.0;
  for (double lo = 0.0; lo < 2.0 * std::numbers::pi; lo += step) {
    const double hi = std::min(lo + step, 2.0 * std::numbers::pi);
    if (gap(hi) <= 0.0) {
      double a = lo, b = hi;
      for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        (gap(m) > 0.0 ? a : b) = m;
      }
      return 0.5 * (a + b);
    }
  }
  return 2.0 * std::numbers::pi;
}

double max_feasible_angle(double wire_diameter, const MachineModel& machine, BendDirection direction) {
  machine.validate();
  if (wire_diameter < 0.0 || !std::isfinite(wire_diameter)) {
    throw Error(ErrorCode::InvalidArgument, "wire diameter must be non-negative");
  }
  if (wire_diameter >= machine.roller_gap) {
    throw Error(ErrorCode::DiameterTooLarge, "wire does not fit between the rollers");
  }
  const double limit = direction == BendDirection::CW ? machine.cw_limit : machine.ccw_limit;
  const double stroke = std::min(limit, punch_die_tangency_stroke(machine));
  // The punch covers the wire's thickness before the centerline turns.
  const double lag = 2.0 * std::asin(wire_diameter / (2.0 * machine.punch_orbit_radius()));
  return std::max(0.0, stroke - lag);
}

std::vector<CollisionBody> machine_bodies(const MachineModel& machine, double /*wire_diameter*/,
                                          std::optional<BendDirection> direction, double punch_angle) {
  const double h = machine.roller_half_height;
  auto vertical = [&](double x, double y, double r) {
    return Capsule{machine.frame * Point3(x, y, -h), machine.frame * Point3(x, y, h), r};
  };
  const double yd = machine.center_radius + machine.roller_gap + machine.die_radius;
  std::vector<CollisionBody> out;
  out.push_back({"housing", Box{machine.frame * machine.housing.pose, machine.housing.half_extents}, false});
  out.push_back({"center_roller", vertical(0.0, 0.0, machine.center_radius), true});
  out.push_back({"die_roller_ccw", vertical(-machine.die_offset, -yd, machine.die_radius), true});
  out.push_back({"die_roller_cw", vertical(-machine.die_offset, yd, machine.die_radius), true});

  Eigen::Vector2d punch(machine.punch_orbit_radius(), 0.0);
  if (direction) {
    const double ys = ys_of(*direction);
    const double yp = machine.center_radius + machine.roller_gap + machine.punch_radius;
    punch = Eigen::Rotation2Dd(ys * punch_angle) * Eigen::Vector2d(machine.punch_offset, -ys * yp);
  }
  out.push_back({"punch_roller", vertical(punch.x(), punch.y(), machine.punch_radius), true});
  return out;
}

namespace {

// Rollers are skipped for samples whose arclength lies in [mask_lo, mask_hi].
bool range_collides(const WireState& posed, double lo, double hi, double mask_lo, double mask_hi,
                    const std::vector<CollisionBody>& bodies, double clearance, double chord_tolerance,
                    std::string* hit) {
  const auto samples = sample_wire(posed, lo, hi, chord_tolerance);
  const double reach = 0.5 * posed.diameter + clearance;
  std::vector<Aabb> boxes;
  boxes.reserve(bodies.size());
  for (const auto& b : bodies) boxes.push_back(bounds(b.shape).inflated(reach));

  for (std::size_t k = 1; k < samples.points.size(); ++k) {
    const Point3& a = samples.points[k - 1];
    const Point3& b = samples.points[k];
    Aabb seg;
    seg.extend(a);
    seg.extend(b);
    const bool masked = samples.arclength[k] >= mask_lo && samples.arclength[k - 1] <= mask_hi;
    for (std::size_t j = 0; j < bodies.size(); ++j) {
      if (masked && bodies[j].roller) continue;
      if (!seg.overlaps(boxes[j])) continue;
      if (segment_shape_distance(a, b, bodies[j].shape) < reach) {
        if (hit) *hit = bodies[j].name;
        return true;
      }
    }
  }
  return false;
}

struct MaskWindow {
  double lo, hi;
};

MaskWindow contact_window(const BendAction& bend, const MachineModel& machine, bool use_alpha) {
  const double fixed = machine.die_offset + machine.die_radius + 2.0 * machine.roller_gap + 0.003;
  const double moving = machine.punch_offset + machine.punch_radius + 2.0 * machine.roller_gap + 0.003;
  if (use_alpha) return {bend.arclength - fixed, bend.end() + moving};
  return {bend.arclength - moving, bend.end() + fixed};
}

}  // namespace

bool wire_collides(const WireState& wire, const Environment& env, double clearance, double chord_tolerance) {
  return range_collides(wire, 0.0, wire.length(), 1.0, -1.0, env.bodies, clearance, chord_tolerance, nullptr);
}

bool posed_wire_collides(const WireState& posed, const BendAction& bend, bool use_alpha,
                         const MachineModel& machine, const Environment& env, BendDirection direction,
                         double punch_angle, double clearance, double chord_tolerance, std::string* hit) {
  auto bodies = env.bodies;
  for (auto& b : machine_bodies(machine, posed.diameter, direction, punch_angle)) bodies.push_back(std::move(b));
  const auto window = contact_window(bend, machine, use_alpha);
  return range_collides(posed, 0.0, posed.length(), window.lo, window.hi, bodies, clearance, chord_tolerance, hit);
}

SimResult simulate_bend(const WireState& posed, const BendAction& bend, BendDirection direction, bool use_alpha,
                        const MachineModel& machine, const Environment& env, const SimOptions& opts) {
  const double d = posed.diameter;
  if (bend.turn > max_feasible_angle(d, machine, direction) + 1e-12) {
    throw Error(ErrorCode::TargetExceedsWorkRange, "required punch rotation exceeds the machine's work range");
  }
  const double lag = 2.0 * std::asin(d / (2.0 * machine.punch_orbit_radius()));
  const Vec3 side = bend_side(posed, bend);
  const double total = posed.length();
  const double end = std::min(bend.end(), total);

  auto state = [&](double gamma) {
    WireState w;
    if (use_alpha) {
      w = wind_arc(posed, bend.arclength, side, gamma, bend.radius);
      w.pose = posed.pose;
    } else {
      Pose motion;
      w = wind_arc(posed, end - bend.radius * gamma, side, gamma, bend.radius, &motion);
      w.pose = posed.pose * motion.inverse();
    }
    return w;
  };

  const auto window = contact_window(bend, machine, use_alpha);
  const double moving_lo = use_alpha ? bend.arclength : 0.0;
  const double moving_hi = use_alpha ? total : end;

  auto collides = [&](double gamma, std::string* hit) {
    auto all = env.bodies;
    for (const auto& b : machine_bodies(machine, d, direction, gamma + lag)) all.push_back(b);
    return range_collides(state(gamma), moving_lo, moving_hi, window.lo, window.hi, all, opts.clearance,
                          opts.chord_tolerance, hit);
  };

  SimResult result;
  double prev = 0.0;
  for (double gamma = std::min(opts.sweep_step, bend.turn);; gamma = std::min(gamma + opts.sweep_step, bend.turn)) {
    std::string hit;
    if (collides(gamma, &hit)) {
      double lo = prev, hi = gamma;
      while (hi - lo > opts.stop_tolerance) {
        const double mid = 0.5 * (lo + hi);
        std::string h;
        if (collides(mid, &h)) {
          hi = mid;
          hit = h;
        } else {
          lo = mid;
        }
      }
      result.wire = state(lo);
      result.achieved_angle = lo;
      result.stopped_early = true;
      result.blocking_body = hit;
      return result;
    }
    prev = gamma;
    if (gamma >= bend.turn) break;
  }
  result.wire = state(bend.turn);
  result.achieved_angle = bend.turn;
  return result;
}

}  // namespace wirebend

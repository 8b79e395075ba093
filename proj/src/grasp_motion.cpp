#include "wirebend/grasp_motion.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <random>

#include "wirebend/error.hpp"

namespace wirebend {

namespace {

struct WorldCapsule {
  Point3 a, b;
  double radius;
  bool gripper;
};

std::vector<WorldCapsule> robot_capsules(const RobotModel& robot, const std::vector<Pose>& frames) {
  std::vector<WorldCapsule> out;
  out.reserve(robot.capsules.size());
  for (const auto& c : robot.capsules) {
    const Pose& t = frames[c.link];
    out.push_back({t * c.a, t * c.b, c.radius, c.gripper});
  }
  return out;
}

bool capsule_hits(const WorldCapsule& c, const std::vector<CollisionBody>& bodies, double clearance) {
  Aabb box;
  box.extend(c.a);
  box.extend(c.b);
  box = box.inflated(c.radius + clearance);
  for (const auto& body : bodies) {
    if (!box.overlaps(bounds(body.shape))) continue;
    if (segment_shape_distance(c.a, c.b, body.shape) < c.radius + clearance) return true;
  }
  return false;
}

double max_abs_diff(const JointConfig& a, const JointConfig& b) { return (a - b).cwiseAbs().maxCoeff(); }

using Clock = std::chrono::steady_clock;

}  // namespace

std::vector<GraspPose> annotate_grasps(double wire_length, double spacing, int rolls, double end_margin,
                                       double jaw_width) {
  if (!(spacing > 0.0) || rolls < 1) throw Error(ErrorCode::InvalidArgument, "grasp spacing and rolls must be positive");
  std::vector<GraspPose> out;
  int id = 0;
  const int count = static_cast<int>(std::floor((wire_length - 2.0 * end_margin) / spacing + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) {
    const double s = end_margin + i * spacing;
    for (int r = 0; r < rolls; ++r) {
      out.push_back({id++, s, 2.0 * std::numbers::pi * r / rolls, jaw_width});
    }
  }
  return out;
}

Pose grasp_world_pose(const GraspPose& g, const WireState& posed) {
  const Mat3 f = posed.frame_at(g.arclength);
  const Vec3 x = f.col(0);
  const Vec3 outward = f * Vec3(0.0, std::cos(g.roll), std::sin(g.roll));
  const Vec3 z = -outward;
  Pose local = Pose::Identity();
  local.linear() << x, z.cross(x), z;
  local.translation() = posed.point_at(g.arclength);
  return posed.pose * local;
}

const char* to_string(GraspVerdict v) {
  switch (v) {
    case GraspVerdict::Available: return "Available";
    case GraspVerdict::Collided: return "Collided";
    case GraspVerdict::IkInfeasible: return "IkInfeasible";
  }
  return "Unknown";
}

const char* to_string(ManipulationStatus s) {
  switch (s) {
    case ManipulationStatus::Ok: return "Ok";
    case ManipulationStatus::NoCommonGrasp: return "NoCommonGrasp";
    case ManipulationStatus::MotionFail: return "MotionFail";
  }
  return "Unknown";
}

MotionScene make_motion_scene(const RobotModel& robot, const Environment& env, const MachineModel& machine,
                              double wire_diameter, double clearance) {
  MotionScene scene;
  scene.robot = robot;
  scene.obstacles = env.bodies;
  for (auto& b : machine_bodies(machine, wire_diameter)) scene.obstacles.push_back(std::move(b));
  scene.clearance = clearance;
  return scene;
}

Attachment attach(const WireState& posed, double grasp_s, const Pose& tcp) {
  Attachment a;
  a.wire = posed;
  a.wire.pose = tcp.inverse() * posed.pose;
  a.grasp_s = grasp_s;
  return a;
}

bool config_valid(const MotionScene& scene, const JointConfig& q, const Attachment* held, const ConfigCheck& check) {
  const auto& robot = scene.robot;
  if (!robot.within_limits(q)) {
    if (check.hit) *check.hit = "joint_limits";
    return false;
  }
  const auto frames = link_poses(robot, q);
  const auto caps = robot_capsules(robot, frames);
  for (std::size_t k = 0; k < caps.size(); ++k) {
    if (capsule_hits(caps[k], scene.obstacles, scene.clearance)) {
      if (check.hit) *check.hit = robot.capsules[k].name;
      return false;
    }
  }
  if (!held) return true;

  WireState wire = held->wire;
  wire.pose = frames.back() * robot.tool * held->wire.pose;
  const auto samples = sample_wire(wire, 0.0, wire.length(), scene.chord_tolerance);
  const double reach = 0.5 * wire.diameter + scene.clearance;
  for (std::size_t k = 1; k < samples.points.size(); ++k) {
    const Point3& a = samples.points[k - 1];
    const Point3& b = samples.points[k];
    Aabb seg;
    seg.extend(a);
    seg.extend(b);
    seg = seg.inflated(reach);
    for (const auto& body : scene.obstacles) {
      if (check.wire_ignores_rollers && body.roller) continue;
      if (!seg.overlaps(bounds(body.shape))) continue;
      if (segment_shape_distance(a, b, body.shape) < reach) {
        if (check.hit) *check.hit = "wire/" + body.name;
        return false;
      }
    }
    const bool near_grasp = samples.arclength[k] > held->grasp_s - scene.grasp_exclusion &&
                            samples.arclength[k - 1] < held->grasp_s + scene.grasp_exclusion;
    if (near_grasp) continue;
    for (std::size_t c = 0; c < caps.size(); ++c) {
      if (segment_segment_distance(a, b, caps[c].a, caps[c].b) < reach + caps[c].radius) {
        if (check.hit) *check.hit = "wire/" + robot.capsules[c].name;
        return false;
      }
    }
  }
  return true;
}

GraspResult classify_grasp(const GraspPose& g, const HeldPose& pose, const MotionScene& scene,
                           const JointConfig& seed, const IkOptions& opts) {
  GraspResult out;
  if (g.arclength < pose.fixed_lo || g.arclength > pose.fixed_hi || g.jaw_width < pose.wire.diameter) {
    out.verdict = GraspVerdict::Collided;
    return out;
  }
  const Pose target = grasp_world_pose(g, pose.wire);
  const auto& robot = scene.robot;

  // Gripper volume at the grasp, independent of the arm.
  std::vector<Pose> frames(robot.dof() + 1, target * robot.tool.inverse());
  const auto caps = robot_capsules(robot, frames);
  const auto samples = sample_wire(pose.wire, 0.0, pose.wire.length(), scene.chord_tolerance);
  for (std::size_t c = 0; c < caps.size(); ++c) {
    if (!robot.capsules[c].gripper) continue;
    if (capsule_hits(caps[c], scene.obstacles, scene.clearance)) {
      out.verdict = GraspVerdict::Collided;
      return out;
    }
    for (std::size_t k = 1; k < samples.points.size(); ++k) {
      if (samples.arclength[k] > g.arclength - scene.grasp_exclusion &&
          samples.arclength[k - 1] < g.arclength + scene.grasp_exclusion) {
        continue;
      }
      if (segment_segment_distance(samples.points[k - 1], samples.points[k], caps[c].a, caps[c].b) <
          caps[c].radius + 0.5 * pose.wire.diameter + scene.clearance) {
        out.verdict = GraspVerdict::Collided;
        return out;
      }
    }
  }

  bool converged = false;
  const auto held = attach(pose.wire, g.arclength, target);
  auto q = solve_ik_filtered(
      robot, target, seed, opts,
      [&](const JointConfig& cand) { return config_valid(scene, cand, &held, {true, nullptr}); }, &converged);
  if (q) {
    out.verdict = GraspVerdict::Available;
    out.q = *q;
  } else {
    out.verdict = converged ? GraspVerdict::Collided : GraspVerdict::IkInfeasible;
  }
  return out;
}

std::vector<int> common_grasps(const std::vector<std::vector<GraspVerdict>>& tables,
                               const std::vector<GraspPose>& grasps) {
  std::vector<int> out;
  if (tables.empty()) return out;
  for (std::size_t g = 0; g < grasps.size(); ++g) {
    bool all = true;
    for (const auto& t : tables) all = all && g < t.size() && t[g] == GraspVerdict::Available;
    if (all) out.push_back(grasps[g].id);
  }
  return out;
}

bool segment_valid(const MotionScene& scene, const JointConfig& a, const JointConfig& b, const Attachment* held,
                   double resolution, const ConfigCheck& check) {
  const int steps = std::max(1, static_cast<int>(std::ceil(max_abs_diff(a, b) / resolution)));
  for (int i = 1; i <= steps; ++i) {
    const JointConfig q = a + (b - a) * (static_cast<double>(i) / steps);
    if (!config_valid(scene, q, held, check)) return false;
  }
  return true;
}

namespace {

struct Tree {
  std::vector<JointConfig> nodes;
  std::vector<int> parent;

  int nearest(const JointConfig& q) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double d = (nodes[k] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    return best;
  }

  std::vector<JointConfig> path_to_root(int k) const {
    std::vector<JointConfig> out;
    for (; k >= 0; k = parent[k]) out.push_back(nodes[k]);
    return out;
  }
};

enum class Extend { Reached, Advanced, Trapped };

Extend extend(Tree& tree, const JointConfig& target, const MotionScene& scene, const Attachment* held,
              const MotionOptions& opts) {
  const int near = tree.nearest(target);
  const JointConfig& from = tree.nodes[near];
  const double dist = max_abs_diff(target, from);
  JointConfig next = target;
  bool reached = true;
  if (dist > opts.extend_step) {
    next = from + (target - from) * (opts.extend_step / dist);
    reached = false;
  }
  if (!segment_valid(scene, from, next, held, opts.resolution)) return Extend::Trapped;
  tree.nodes.push_back(next);
  tree.parent.push_back(near);
  return reached ? Extend::Reached : Extend::Advanced;
}

Trajectory densify(const std::vector<JointConfig>& path, double step) {
  Trajectory out{path.front()};
  for (std::size_t k = 1; k < path.size(); ++k) {
    const int n = std::max(1, static_cast<int>(std::ceil(max_abs_diff(path[k - 1], path[k]) / step - 1e-12)));
    for (int i = 1; i < n; ++i) out.push_back(path[k - 1] + (path[k] - path[k - 1]) * (static_cast<double>(i) / n));
    out.push_back(path[k]);
  }
  return out;
}

}  // namespace

Trajectory plan_joint_path(const MotionScene& scene, const JointConfig& start, const JointConfig& goal,
                           const Attachment* held, const MotionOptions& opts) {
  if (start.size() != goal.size() || start.size() != static_cast<Eigen::Index>(scene.robot.dof())) {
    throw Error(ErrorCode::InvalidArgument, "configuration size mismatch");
  }
  if (max_abs_diff(start, goal) < 1e-12) return {start};
  if (!config_valid(scene, start, held)) throw Error(ErrorCode::InvalidArgument, "start configuration in collision");
  if (!config_valid(scene, goal, held)) throw Error(ErrorCode::InvalidArgument, "goal configuration in collision");
  if (segment_valid(scene, start, goal, held, opts.resolution)) return densify({start, goal}, opts.waypoint_step);

  const auto t0 = Clock::now();
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = scene.robot.dof();
  JointConfig lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& j = scene.robot.joints[k];
    lo[k] = std::max(j.lower, std::min(start[k], goal[k]) - std::numbers::pi);
    hi[k] = std::min(j.upper, std::max(start[k], goal[k]) + std::numbers::pi);
  }

  Tree a{{start}, {-1}}, b{{goal}, {-1}};
  bool a_is_start = true;
  std::vector<JointConfig> raw;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (std::chrono::duration<double>(Clock::now() - t0).count() > opts.timeout) {
      throw Error(ErrorCode::PlanningTimeout, "joint-space planner ran out of time");
    }
    JointConfig sample(n);
    if (unit(rng) < opts.goal_bias) {
      sample = b.nodes.front();
    } else {
      for (std::size_t k = 0; k < n; ++k) sample[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
    }
    if (extend(a, sample, scene, held, opts) != Extend::Trapped) {
      const JointConfig& added = a.nodes.back();
      Extend status = Extend::Advanced;
      while (status == Extend::Advanced) status = extend(b, added, scene, held, opts);
      if (status == Extend::Reached) {
        auto from_a = a.path_to_root(static_cast<int>(a.nodes.size()) - 1);
        auto from_b = b.path_to_root(static_cast<int>(b.nodes.size()) - 1);
        std::reverse(from_a.begin(), from_a.end());
        from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
        if (!a_is_start) std::reverse(from_a.begin(), from_a.end());
        raw = std::move(from_a);
        break;
      }
    }
    std::swap(a, b);
    a_is_start = !a_is_start;
  }
  if (raw.empty()) throw Error(ErrorCode::PlanningTimeout, "joint-space planner hit its iteration cap");

  for (int round = 0; round < opts.shortcut_rounds && raw.size() > 2; ++round) {
    const auto i = static_cast<std::size_t>(unit(rng) * (raw.size() - 2));
    const auto j = std::min(raw.size() - 1, i + 2 + static_cast<std::size_t>(unit(rng) * (raw.size() - i - 2)));
    if (segment_valid(scene, raw[i], raw[j], held, opts.resolution)) {
      raw.erase(raw.begin() + static_cast<long>(i) + 1, raw.begin() + static_cast<long>(j));
    }
  }
  return densify(raw, opts.waypoint_step);
}

namespace {

// Cartesian lift along `up`, as joint configurations from q (excluded) upward.
std::optional<Trajectory> lift_path(const MotionScene& scene, const JointConfig& q, const Vec3& up,
                                    const Attachment& held, const IkOptions& ik, const MotionOptions& opts) {
  const Pose tcp = forward_kinematics(scene.robot, q);
  Trajectory out{q};
  IkOptions local = ik;
  local.restarts = 0;
  for (int i = 1; i <= opts.lift_steps; ++i) {
    Pose target = tcp;
    target.translation() += up * (opts.lift_height * i / opts.lift_steps);
    auto next = solve_ik_filtered(scene.robot, target, out.back(), local, nullptr);
    if (!next || max_abs_diff(*next, out.back()) > 0.5) return std::nullopt;
    if (!segment_valid(scene, out.back(), *next, &held, opts.resolution, {true, nullptr})) return std::nullopt;
    const auto piece = densify({out.back(), *next}, opts.waypoint_step);
    out.insert(out.end(), piece.begin() + 1, piece.end());
  }
  return out;
}

}  // namespace

ManipulationResult plan_manipulation(const std::vector<HeldPose>& before, const std::vector<WireState>& after,
                                     const std::vector<GraspPose>& grasps, const MotionScene& scene,
                                     const MachineModel& machine, const IkOptions& ik, const MotionOptions& opts,
                                     GraspVerdictCache* cache, const std::vector<std::uint64_t>* pose_keys) {
  ManipulationResult res;
  const std::size_t n = before.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "no wire poses to manipulate");
  if (after.size() + 1 < n) throw Error(ErrorCode::InvalidArgument, "missing post-bend wire states");
  if (grasps.empty()) {
    res.status = ManipulationStatus::NoCommonGrasp;
    res.reason = "no grasp annotations";
    return res;
  }

  // Running intersection, pose by pose, so only surviving grasps are classified.
  std::vector<std::size_t> alive(grasps.size());
  for (std::size_t g = 0; g < grasps.size(); ++g) alive[g] = g;
  std::map<std::size_t, std::vector<JointConfig>> holds;
  res.verdicts.assign(n, std::vector<GraspVerdict>(grasps.size(), GraspVerdict::IkInfeasible));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> next;
    std::vector<signed char>* known = nullptr;
    if (cache && pose_keys && i < pose_keys->size()) {
      auto& slot = cache->rejected[(*pose_keys)[i]];
      if (slot.empty()) slot.assign(grasps.size(), -1);
      known = &slot;
    }
    for (std::size_t g : alive) {
      if (known && (*known)[g] >= 0) {
        res.verdicts[i][g] = static_cast<GraspVerdict>((*known)[g]);
        ++cache->hits;
        continue;
      }
      IkOptions local = ik;
      local.seed = ik.seed + 7919ULL * static_cast<std::uint64_t>(grasps[g].id) + 104729ULL * i;
      const JointConfig& seed = i == 0 ? scene.robot.home : holds[g].back();
      const auto r = classify_grasp(grasps[g], before[i], scene, seed, local);
      res.verdicts[i][g] = r.verdict;
      if (r.verdict == GraspVerdict::Available) {
        holds[g].push_back(r.q);
        next.push_back(g);
      } else if (known) {
        (*known)[g] = static_cast<signed char>(r.verdict);
      }
    }
    alive = std::move(next);
    if (alive.empty()) {
      res.status = ManipulationStatus::NoCommonGrasp;
      res.fail_step = static_cast<int>(i);
      res.reason = "no grasp survives pose " + std::to_string(i);
      return res;
    }
  }

  const Vec3 up = machine.frame.linear() * Vec3::UnitZ();
  int attempts = 0;
  for (std::size_t g : alive) {
    if (attempts++ >= opts.max_grasp_attempts) break;
    const auto& q = holds[g];
    std::vector<TransferStep> motions;
    int failed_at = -1;
    MotionOptions local = opts;
    local.seed = opts.seed + 31ULL * static_cast<std::uint64_t>(grasps[g].id);
    try {
      motions.push_back({plan_joint_path(scene, scene.robot.home, q[0], nullptr, local), "pick", 0, 0});
    } catch (const Error&) {
      failed_at = 0;
    }
    for (std::size_t i = 1; i < n && failed_at < 0; ++i) {
      const Pose tcp_prev = forward_kinematics(scene.robot, q[i - 1]);
      const auto held = attach(after[i - 1], grasps[g].arclength, tcp_prev);
      const auto up_from = lift_path(scene, q[i - 1], up, held, ik, local);
      const auto held_goal = attach(after[i - 1], grasps[g].arclength, tcp_prev);
      const auto down_to = lift_path(scene, q[i], up, held_goal, ik, local);
      if (!up_from || !down_to) {
        failed_at = static_cast<int>(i);
        break;
      }
      try {
        local.seed += 1;
        auto mid = plan_joint_path(scene, up_from->back(), down_to->back(), &held, local);
        Trajectory path = *up_from;
        path.insert(path.end(), mid.begin() + 1, mid.end());
        path.insert(path.end(), down_to->rbegin() + 1, down_to->rend());
        motions.push_back({std::move(path), "transfer", static_cast<int>(up_from->size()),
                           static_cast<int>(down_to->size())});
      } catch (const Error&) {
        failed_at = static_cast<int>(i);
      }
    }
    if (failed_at < 0) {
      res.status = ManipulationStatus::Ok;
      res.grasp_id = grasps[g].id;
      res.hold_configs = q;
      res.motions = std::move(motions);
      return res;
    }
    res.fail_step = std::max(res.fail_step, failed_at);
  }
  res.status = ManipulationStatus::MotionFail;
  res.reason = "no common grasp completes all motions";
  return res;
}

}  // namespace wirebend

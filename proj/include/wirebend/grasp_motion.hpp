#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wirebend/wire_sim.hpp"

namespace wirebend {

using JointConfig = Eigen::VectorXd;

struct Joint {
  std::string name;
  Pose origin = Pose::Identity();  // parent link -> joint frame at q = 0
  Vec3 axis = Vec3::UnitZ();
  double lower = -2.0 * std::numbers::pi;
  double upper = 2.0 * std::numbers::pi;
};

/// Collision capsule rigidly attached to a link. Link 0 is the base, link k
/// the body moved by joint k - 1, link dof() the flange.
struct LinkCapsule {
  std::string name;
  int link = 0;
  Point3 a = Point3::Zero();
  Point3 b = Point3::Zero();
  double radius = 0.0;
  bool gripper = false;
};

struct RobotModel {
  std::string name = "robot";
  Pose base = Pose::Identity();
  std::vector<Joint> joints;
  Pose tool = Pose::Identity();  // flange -> TCP
  std::vector<LinkCapsule> capsules;
  std::vector<CollisionBody> base_envelope;  // static bodies in the base frame
  JointConfig home;

  std::size_t dof() const { return joints.size(); }
  void validate() const;
  bool within_limits(const JointConfig& q) const;
  double reach() const;

  /// UR3e kinematics with a two-finger parallel gripper.
  static RobotModel ur3e();
};

/// World poses of every link frame (size dof() + 1).
std::vector<Pose> link_poses(const RobotModel& robot, const JointConfig& q);
Pose flange_pose(const RobotModel& robot, const JointConfig& q);
Pose forward_kinematics(const RobotModel& robot, const JointConfig& q);

/// Position error and rotation angle between two poses.
std::pair<double, double> pose_error(const Pose& a, const Pose& b);

struct IkOptions {
  int restarts = 20;
  int max_iterations = 150;
  double position_tolerance = 1e-4;
  double rotation_tolerance = 1e-3;
  double damping = 0.02;
  std::uint64_t seed = 1;
};

/// Damped least squares from `seed`, then random restarts. Throws NoSolution.
JointConfig solve_ik(const RobotModel& robot, const Pose& target, const JointConfig& seed,
                     const IkOptions& opts = {});

/// Same search, but every converged solution is offered to `accept`; the first
/// accepted one is returned. `converged` reports whether any solution was found.
std::optional<JointConfig> solve_ik_filtered(const RobotModel& robot, const Pose& target,
                                             const JointConfig& seed, const IkOptions& opts,
                                             const std::function<bool(const JointConfig&)>& accept,
                                             bool* converged = nullptr);

/// Grasp annotated on the wire: material arclength, roll of the approach
/// direction about the wire tangent, jaw opening.
struct GraspPose {
  int id = 0;
  double arclength = 0.0;
  double roll = 0.0;
  double jaw_width = 0.01;
};

std::vector<GraspPose> annotate_grasps(double wire_length, double spacing, int rolls, double end_margin,
                                       double jaw_width);

/// TCP pose in world for a grasp on a posed wire: x along the wire, z the
/// approach direction (pointing into the wire).
Pose grasp_world_pose(const GraspPose& g, const WireState& posed);

enum class GraspVerdict { Available, Collided, IkInfeasible };
const char* to_string(GraspVerdict v);

/// Wire pose the robot must hold, with the arclength span that stays still
/// while the machine bends it.
struct HeldPose {
  WireState wire;
  double fixed_lo = 0.0;
  double fixed_hi = 0.0;
};

struct MotionScene {
  RobotModel robot;
  std::vector<CollisionBody> obstacles;  // env plus machine bodies, world frame
  double clearance = 0.001;
  double chord_tolerance = 5e-4;
  double grasp_exclusion = 0.005;  // wire near the grasp is ignored against the gripper
};

MotionScene make_motion_scene(const RobotModel& robot, const Environment& env, const MachineModel& machine,
                              double wire_diameter, double clearance);

/// Wire rigidly attached to the TCP.
struct Attachment {
  WireState wire;      // pose field is relative to the TCP
  double grasp_s = 0.0;
};

Attachment attach(const WireState& posed, double grasp_s, const Pose& tcp);

struct ConfigCheck {
  bool wire_ignores_rollers = false;
  std::string* hit = nullptr;
};

bool config_valid(const MotionScene& scene, const JointConfig& q, const Attachment* held,
                  const ConfigCheck& check = {});

struct GraspResult {
  GraspVerdict verdict = GraspVerdict::IkInfeasible;
  JointConfig q;
};

GraspResult classify_grasp(const GraspPose& g, const HeldPose& pose, const MotionScene& scene,
                           const JointConfig& seed, const IkOptions& opts);

std::vector<int> common_grasps(const std::vector<std::vector<GraspVerdict>>& tables,
                               const std::vector<GraspPose>& grasps);

struct MotionOptions {
  double resolution = 0.5 * std::numbers::pi / 180.0;
  double extend_step = 0.35;
  double waypoint_step = 5.0 * std::numbers::pi / 180.0;
  double goal_bias = 0.1;
  int max_iterations = 1500;
  double timeout = 10.0;
  int shortcut_rounds = 30;
  double lift_height = 0.04;
  int lift_steps = 4;
  int max_grasp_attempts = 6;
  std::uint64_t seed = 1;
};

using Trajectory = std::vector<JointConfig>;

/// Checks the straight joint-space segment at `resolution` per joint.
bool segment_valid(const MotionScene& scene, const JointConfig& a, const JointConfig& b, const Attachment* held,
                   double resolution, const ConfigCheck& check = {});

/// RRT-Connect in joint space. Throws PlanningTimeout on budget exhaustion and
/// InvalidArgument when an endpoint is invalid.
Trajectory plan_joint_path(const MotionScene& scene, const JointConfig& start, const JointConfig& goal,
                           const Attachment* held, const MotionOptions& opts);

enum class ManipulationStatus { Ok, NoCommonGrasp, MotionFail };
const char* to_string(ManipulationStatus s);

struct TransferStep {
  // Pick (step 0) or transfer from pose i - 1 to pose i.
  Trajectory path;
  std::string kind;
  // Leading/trailing waypoints of the vertical lift out of and back into the
  // rollers; the wire may touch rollers on those edges.
  int lift_count = 0;
  int lower_count = 0;
};

struct ManipulationResult {
  ManipulationStatus status = ManipulationStatus::NoCommonGrasp;
  int grasp_id = -1;
  int fail_step = 0;
  std::vector<JointConfig> hold_configs;
  std::vector<TransferStep> motions;
  std::vector<std::vector<GraspVerdict>> verdicts;  // per pose, per grasp (only computed entries)
  std::string reason;
};

/// Rejected grasps per wire pose, shared between calls whose poses carry the
/// same key. Only rejections are kept; accepted grasps are re-solved from the
/// caller's previous hold configuration.
struct GraspVerdictCache {
  std::unordered_map<std::uint64_t, std::vector<signed char>> rejected;  // -1 unknown, else GraspVerdict
  long hits = 0;
};

/// `before[i]` is the wire held for bend i; `after[i]` the same wire once bent.
/// `pose_keys[i]`, when given with a cache, identifies before[i].
ManipulationResult plan_manipulation(const std::vector<HeldPose>& before, const std::vector<WireState>& after,
                                     const std::vector<GraspPose>& grasps, const MotionScene& scene,
                                     const MachineModel& machine, const IkOptions& ik,
                                     const MotionOptions& opts, GraspVerdictCache* cache = nullptr,
                                     const std::vector<std::uint64_t>* pose_keys = nullptr);

}  // namespace wirebend

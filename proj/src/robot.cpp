#include <cmath>
#include <random>

#include "wirebend/error.hpp"
#include "wirebend/grasp_motion.hpp"

namespace wirebend {

namespace {

Pose origin(double x, double y, double z, double roll, double pitch, double yaw) {
  Pose p = Pose::Identity();
  p.translation() = Vec3(x, y, z);
  p.linear() = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                Eigen::AngleAxisd(roll, Vec3::UnitX()))
                   .toRotationMatrix();
  return p;
}

Vec3 rotation_error(const Mat3& target, const Mat3& current) {
  const Eigen::AngleAxisd aa(target * current.transpose());
  return aa.angle() * aa.axis();
}

}  // namespace

void RobotModel::validate() const {
  if (joints.empty()) throw Error(ErrorCode::InvalidArgument, "robot has no joints");
  for (const auto& j : joints) {
    if (!(j.lower < j.upper)) throw Error(ErrorCode::InvalidArgument, "joint " + j.name + ": lower >= upper");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "joint axis not unit");
  }
  for (const auto& c : capsules) {
    if (c.link < 0 || c.link > static_cast<int>(joints.size()) || c.radius < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "bad capsule " + c.name);
    }
  }
  if (home.size() != static_cast<Eigen::Index>(joints.size()) || !within_limits(home)) {
    throw Error(ErrorCode::InvalidArgument, "home configuration invalid");
  }
}

bool RobotModel::within_limits(const JointConfig& q) const {
  if (q.size() != static_cast<Eigen::Index>(joints.size())) return false;
  for (std::size_t k = 0; k < joints.size(); ++k) {
    if (!(q[k] >= joints[k].lower - 1e-12 && q[k] <= joints[k].upper + 1e-12)) return false;
  }
  return true;
}

double RobotModel::reach() const {
  double r = tool.translation().norm();
  for (std::size_t k = 1; k < joints.size(); ++k) r += joints[k].origin.translation().norm();
  return r;
}

RobotModel RobotModel::ur3e() {
  constexpr double pi = std::numbers::pi;
  const double d1 = 0.15185, a2 = -0.24355, a3 = -0.2132, d4 = 0.13105, d5 = 0.08535, d6 = 0.0921;
  RobotModel r;
  r.name = "ur3e";
  r.joints = {
      {"shoulder_pan", origin(0, 0, d1, 0, 0, 0), Vec3::UnitZ(), -2 * pi, 2 * pi},
      {"shoulder_lift", origin(0, 0, 0, pi / 2, 0, 0), Vec3::UnitZ(), -2 * pi, 2 * pi},
      {"elbow", origin(a2, 0, 0, 0, 0, 0), Vec3::UnitZ(), -pi, pi},
      {"wrist_1", origin(a3, 0, d4, 0, 0, 0), Vec3::UnitZ(), -2 * pi, 2 * pi},
      {"wrist_2", origin(0, -d5, 0, pi / 2, 0, 0), Vec3::UnitZ(), -2 * pi, 2 * pi},
      {"wrist_3", origin(0, d6, 0, pi / 2, pi, pi), Vec3::UnitZ(), -2 * pi, 2 * pi},
  };
  r.tool = Pose(Eigen::Translation3d(0, 0, 0.14));
  r.capsules = {
      {"upper_arm", 2, Point3(0, 0, 0.12), Point3(a2, 0, 0.12), 0.045, false},
      {"forearm", 3, Point3(0, 0, 0.03), Point3(a3, 0, 0.03), 0.035, false},
      {"wrist_1", 4, Point3(0, 0, -0.03), Point3(0, -d5, 0), 0.032, false},
      {"wrist_2", 5, Point3(0, 0, -0.03), Point3(0, d6 * 0.6, 0), 0.032, false},
      {"palm", 6, Point3(0, 0, 0.0), Point3(0, 0, 0.10), 0.035, true},
      {"finger_left", 6, Point3(0, 0.008, 0.10), Point3(0, 0.008, 0.145), 0.005, true},
      {"finger_right", 6, Point3(0, -0.008, 0.10), Point3(0, -0.008, 0.145), 0.005, true},
  };
  r.base_envelope = {{"robot_base", Capsule{Point3(0, 0, 0), Point3(0, 0, 0.10), 0.065}, false}};
  r.home = JointConfig(6);
  r.home << 0.0, -pi / 2, pi / 2, -pi / 2, -pi / 2, 0.0;
  return r;
}

std::vector<Pose> link_poses(const RobotModel& robot, const JointConfig& q) {
  std::vector<Pose> out;
  out.reserve(robot.dof() + 1);
  Pose t = robot.base;
  out.push_back(t);
  for (std::size_t k = 0; k < robot.dof(); ++k) {
    const auto& j = robot.joints[k];
    t = t * j.origin * Eigen::AngleAxisd(q[k], j.axis);
    out.push_back(t);
  }
  return out;
}

Pose flange_pose(const RobotModel& robot, const JointConfig& q) { return link_poses(robot, q).back(); }

Pose forward_kinematics(const RobotModel& robot, const JointConfig& q) { return flange_pose(robot, q) * robot.tool; }

std::pair<double, double> pose_error(const Pose& a, const Pose& b) {
  const double pos = (a.translation() - b.translation()).norm();
  const double rot = Eigen::AngleAxisd(a.linear() * b.linear().transpose()).angle();
  return {pos, rot};
}

namespace {

// One DLS descent; returns true when within tolerance.
bool descend(const RobotModel& robot, const Pose& target, JointConfig& q, const IkOptions& opts) {
  const std::size_t n = robot.dof();
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const auto frames = link_poses(robot, q);
    const Pose tcp = frames.back() * robot.tool;
    Eigen::Matrix<double, 6, 1> err;
    err.head<3>() = target.translation() - tcp.translation();
    err.tail<3>() = rotation_error(target.linear(), tcp.linear());
    if (err.head<3>().norm() < 0.5 * opts.position_tolerance && err.tail<3>().norm() < 0.5 * opts.rotation_tolerance) {
      return true;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const Pose joint_frame = frames[k] * robot.joints[k].origin;
      const Vec3 z = joint_frame.linear() * robot.joints[k].axis;
      jac.col(k).head<3>() = z.cross(tcp.translation() - joint_frame.translation());
      jac.col(k).tail<3>() = z;
    }
    const double lambda2 = opts.damping * opts.damping;
    const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::VectorXd dq = jac.transpose() * jjt.ldlt().solve(err);
    const double biggest = dq.cwiseAbs().maxCoeff();
    if (biggest > 0.4) dq *= 0.4 / biggest;
    q += dq;
    for (std::size_t k = 0; k < n; ++k) q[k] = std::clamp(q[k], robot.joints[k].lower, robot.joints[k].upper);
  }
  const auto [pe, re] = pose_error(target, forward_kinematics(robot, q));
  return pe < opts.position_tolerance && re < opts.rotation_tolerance;
}

}  // namespace

std::optional<JointConfig> solve_ik_filtered(const RobotModel& robot, const Pose& target, const JointConfig& seed,
                                             const IkOptions& opts,
                                             const std::function<bool(const JointConfig&)>& accept,
                                             bool* converged) {
  if (converged) *converged = false;
  if (!target.matrix().allFinite()) throw Error(ErrorCode::InvalidArgument, "IK target not finite");
  if (seed.size() != static_cast<Eigen::Index>(robot.dof())) {
    throw Error(ErrorCode::InvalidArgument, "IK seed has wrong size");
  }
  const Point3 shoulder = (robot.base * robot.joints[0].origin).translation();
  if ((target.translation() - shoulder).norm() > robot.reach() + 1e-6) return std::nullopt;

  std::mt19937_64 rng(opts.seed);
  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    JointConfig q = seed;
    if (attempt > 0) {
      for (std::size_t k = 0; k < robot.dof(); ++k) {
        const double lo = std::max(robot.joints[k].lower, -std::numbers::pi);
        const double hi = std::min(robot.joints[k].upper, std::numbers::pi);
        q[k] = std::uniform_real_distribution<double>(lo, hi)(rng);
      }
    }
    if (!descend(robot, target, q, opts)) continue;
    if (converged) *converged = true;
    if (!accept || accept(q)) return q;
  }
  return std::nullopt;
}

JointConfig solve_ik(const RobotModel& robot, const Pose& target, const JointConfig& seed, const IkOptions& opts) {
  auto q = solve_ik_filtered(robot, target, seed, opts, nullptr);
  if (!q) throw Error(ErrorCode::NoSolution, "no IK solution within tolerance");
  return *q;
}

}  // namespace wirebend

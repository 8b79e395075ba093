#pragma once

// Sampling collision oracle for robot configurations: points sampled along
// every capsule axis and along the held wire, tested against each obstacle
// with closed-form point distances (no library collision code involved).

#include <string>

#include "oracles.hpp"
#include "wirebend/grasp_motion.hpp"

namespace oracle {

inline double point_shape(const V& p, const wirebend::Shape& s) {
  if (const auto* b = std::get_if<wirebend::Box>(&s)) return point_box(p, b->pose, b->half_extents);
  if (const auto* c = std::get_if<wirebend::Capsule>(&s)) return point_capsule(p, c->a, c->b, c->radius);
  const auto& sp = std::get<wirebend::Sphere>(s);
  return std::max(0.0, (p - sp.center).norm() - sp.radius);
}

struct SampledHit {
  bool hit = false;
  std::string what;
};

// `slack` absorbs the chord sampling error of the library's own check.
inline SampledHit sample_config(const wirebend::MotionScene& scene, const Eigen::VectorXd& q,
                                const wirebend::Attachment* held, bool ignore_rollers, double step = 0.002,
                                double slack = 1e-6) {
  using namespace wirebend;
  const auto& robot = scene.robot;
  if (!robot.within_limits(q)) return {true, "limits"};
  const auto frames = link_poses(robot, q);
  for (const auto& cap : robot.capsules) {
    const V a = frames[cap.link] * cap.a, b = frames[cap.link] * cap.b;
    const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
    for (int i = 0; i <= m; ++i) {
      const V p = a + (b - a) * (static_cast<double>(i) / m);
      for (const auto& body : scene.obstacles) {
        if (point_shape(p, body.shape) < cap.radius + scene.clearance - slack) return {true, cap.name + "/" + body.name};
      }
    }
  }
  if (!held) return {};
  WireState w = held->wire;
  w.pose = frames.back() * robot.tool * held->wire.pose;
  const double len = w.length();
  const double reach = 0.5 * w.diameter + scene.clearance - slack;
  for (double s = 0.0; s <= len; s += 0.5 * step) {
    const V p = w.pose * w.point_at(s);
    for (const auto& body : scene.obstacles) {
      if (ignore_rollers && body.roller) continue;
      if (point_shape(p, body.shape) < reach) return {true, "wire/" + body.name};
    }
  }
  return {};
}

}  // namespace oracle

#include "wirebend/plan_doc.hpp"

namespace oracle {

// Every waypoint of a plan document against the sampling oracle.
inline SampledHit check_plan_waypoints(const wirebend::Json& doc, int* checked = nullptr) {
  using namespace wirebend;
  PlanningContext ctx;
  ctx.bends = bendset_from_json(doc.at("bending_set"));
  ctx.machine = machine_from_json(doc.at("machine"));
  const RobotModel robot = robot_from_json(doc.at("robot"));
  ctx.env = make_environment(world_from_json(doc.at("world")), robot);
  ctx.sim.clearance = doc.at("config").at("clearance").get<double>();
  const auto setup = make_motion_setup(ctx, robot, grasps_from_json(doc.at("grasp_config")), 1);
  if (doc.at("grasp").is_null()) return {};
  const double gs = doc["grasp"].at("arclength").get<double>();
  auto config = [](const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  const auto& trajs = doc.at("trajectories");
  int count = 0;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    std::optional<Attachment> held;
    if (k > 0) {
      const auto bent = wire_from_json(doc["steps"][k - 1].at("bent"));
      held = attach(bent, gs, forward_kinematics(robot, config(doc["hold_configs"][k - 1])));
    }
    const auto& wp = trajs[k].at("waypoints");
    const int m = static_cast<int>(wp.size());
    const int lift = trajs[k].value("lift_count", 0), lower = trajs[k].value("lower_count", 0);
    for (int i = 0; i < m; ++i) {
      const bool in_lift = i < lift || i >= m - lower;
      auto r = sample_config(setup.scene, config(wp[i]), held ? &*held : nullptr, in_lift);
      ++count;
      if (r.hit) {
        r.what = "trajectory " + std::to_string(k) + " waypoint " + std::to_string(i) + ": " + r.what;
        if (checked) *checked = count;
        return r;
      }
    }
  }
  if (checked) *checked = count;
  return {};
}

}  // namespace oracle

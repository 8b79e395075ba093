#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wirebend/seq_planner.hpp"

namespace wirebend {

using Json = nlohmann::ordered_json;

/// Plain x,y,z lines (commas or whitespace), '#' comments. Meters.
std::vector<Point3> read_curve(const std::filesystem::path& path);
std::vector<Point3> parse_curve(const std::string& text);
void write_curve(const std::filesystem::path& path, const std::vector<Point3>& pts);

Json to_json(const Pose& p);
Pose pose_from_json(const Json& j);

Json to_json(const MachineModel& m);
MachineModel machine_from_json(const Json& j);

Json to_json(const RobotModel& r);
RobotModel robot_from_json(const Json& j);

/// Static world: table top height plus extra bodies (the robot base envelope
/// comes from the robot file).
struct WorldConfig {
  double table_height = 0.0;
  Vec3 table_center = Vec3(0.3, 0.0, 0.0);
  Vec3 table_half_extents = Vec3(0.6, 0.6, 0.02);
  std::vector<CollisionBody> bodies;
};
Json to_json(const WorldConfig& w);
WorldConfig world_from_json(const Json& j);

struct GraspConfig {
  double spacing = 0.01;
  int rolls = 8;
  double end_margin = 0.01;
  double jaw_width = 0.01;
  std::vector<GraspPose> explicit_grasps;  // used instead of the grid when non-empty
};
Json to_json(const GraspConfig& g);
GraspConfig grasps_from_json(const Json& j);
std::vector<GraspPose> make_grasps(const GraspConfig& g, double wire_length);

Json to_json(const CollisionBody& b);
CollisionBody body_from_json(const Json& j);

Json to_json(const BendSet& s);
BendSet bendset_from_json(const Json& j);

struct ProjectConfig {
  std::filesystem::path curve_file;
  double epsilon = 0.001;
  std::filesystem::path machine_file;
  std::filesystem::path robot_file;
  std::filesystem::path grasp_file;
  std::filesystem::path world_file;
  double budget = 120.0;
  double clearance = 0.001;
  std::uint64_t seed = 1;
  WireSpec wire;
  double min_bend_angle = 0.5 * std::numbers::pi / 180.0;
  bool plan_motion = true;
};

/// Relative file paths resolve against the config file's directory.
/// Files a project omits come from `defaults_dir` (machine.json, robot.json,
/// grasps.json, world.json) when present there, else built-in defaults.
ProjectConfig load_project(const std::filesystem::path& path, const std::filesystem::path& defaults_dir = {});
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string dump(const Json& j);

/// Everything the planner needs, resolved from a project.
struct Scenario {
  ProjectConfig config;
  std::vector<Point3> curve;
  std::vector<Point3> pivots;
  MachineModel machine;
  RobotModel robot;
  WorldConfig world;
  GraspConfig grasp_config;
  PlanningContext ctx;
  MotionSetup motion;
};

Environment make_environment(const WorldConfig& world, const RobotModel& robot);
MotionSetup make_motion_setup(const PlanningContext& ctx, const RobotModel& robot, const GraspConfig& grasps,
                              std::uint64_t seed);
Scenario load_scenario(const std::filesystem::path& config_path, const std::filesystem::path& defaults_dir = {});
Scenario scenario_from_project(ProjectConfig cfg);
/// Builds the scenario from already loaded parts (curve in meters).
Scenario build_scenario(ProjectConfig cfg, std::vector<Point3> curve, MachineModel machine, RobotModel robot,
                        WorldConfig world, GraspConfig grasps);

/// Max distance of dense curve points to the simplified polyline.
double polyline_deviation(const std::vector<Point3>& curve, const std::vector<Point3>& pivots);

std::string sha256_hex(const std::string& data);

}  // namespace wirebend

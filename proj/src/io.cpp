#include "wirebend/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "wirebend/error.hpp"

namespace wirebend {

namespace fs = std::filesystem;

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, std::string(what) + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->template get<T>();
}

bool parse_double(std::string_view tok, double& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<Point3> parse_curve(const std::string& text) {
  std::vector<Point3> pts;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<std::string> toks;
    for (std::string t; fields >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks.size() != 3) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": expected 3 values, got " + std::to_string(toks.size()));
    }
    Point3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(toks[k], p[k])) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": not a number: '" + toks[k] + "'");
      }
      if (!std::isfinite(p[k])) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": non-finite value");
      }
    }
    pts.push_back(p);
  }
  return pts;
}

std::vector<Point3> read_curve(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open curve file " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return parse_curve(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.what());
  }
}

void write_curve(const fs::path& path, const std::vector<Point3>& pts) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& p : pts) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  write_text(path, out.str());
}

Json to_json(const Pose& p) {
  const Mat3 r = p.linear();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return Json{{"position", vec(p.translation())}, {"rpy", Json::array({roll + 0.0, pitch + 0.0, yaw + 0.0})}};
}

Pose pose_from_json(const Json& j) {
  Pose p = Pose::Identity();
  if (j.contains("position")) p.translation() = vec_from(j["position"], "position");
  if (j.contains("rpy")) {
    const Vec3 rpy = vec_from(j["rpy"], "rpy");
    p.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  }
  return p;
}

Json to_json(const CollisionBody& b) {
  Json j{{"name", b.name}};
  if (const auto* box = std::get_if<Box>(&b.shape)) {
    j["type"] = "box";
    j["pose"] = to_json(box->pose);
    j["half_extents"] = vec(box->half_extents);
  } else if (const auto* cap = std::get_if<Capsule>(&b.shape)) {
    j["type"] = "capsule";
    j["a"] = vec(cap->a);
    j["b"] = vec(cap->b);
    j["radius"] = cap->radius;
  } else {
    const auto& sph = std::get<Sphere>(b.shape);
    j["type"] = "sphere";
    j["center"] = vec(sph.center);
    j["radius"] = sph.radius;
  }
  j["roller"] = b.roller;
  return j;
}

CollisionBody body_from_json(const Json& j) {
  CollisionBody b;
  b.name = get_or<std::string>(j, "name", "body");
  b.roller = get_or(j, "roller", false);
  const auto type = j.at("type").get<std::string>();
  if (type == "box") {
    b.shape = Box{pose_from_json(j.at("pose")), vec_from(j.at("half_extents"), "half_extents")};
  } else if (type == "capsule") {
    b.shape = Capsule{vec_from(j.at("a"), "a"), vec_from(j.at("b"), "b"), j.at("radius").get<double>()};
  } else if (type == "sphere") {
    b.shape = Sphere{vec_from(j.at("center"), "center"), j.at("radius").get<double>()};
  } else {
    throw Error(ErrorCode::ParseError, "unknown body type '" + type + "'");
  }
  return b;
}

Json to_json(const MachineModel& m) {
  return Json{{"placement", to_json(m.frame)},
              {"center_radius", m.center_radius},
              {"roller_gap", m.roller_gap},
              {"roller_half_height", m.roller_half_height},
              {"die_offset", m.die_offset},
              {"die_radius", m.die_radius},
              {"punch_offset", m.punch_offset},
              {"punch_radius", m.punch_radius},
              {"cw_limit", m.cw_limit},
              {"ccw_limit", m.ccw_limit},
              {"contact_slack", m.contact_slack},
              {"housing", Json{{"pose", to_json(m.housing.pose)}, {"half_extents", vec(m.housing.half_extents)}}}};
}

MachineModel machine_from_json(const Json& j) {
  MachineModel m;
  if (j.contains("placement")) m.frame = pose_from_json(j["placement"]);
  m.center_radius = get_or(j, "center_radius", m.center_radius);
  m.roller_gap = get_or(j, "roller_gap", m.roller_gap);
  m.roller_half_height = get_or(j, "roller_half_height", m.roller_half_height);
  m.die_offset = get_or(j, "die_offset", m.die_offset);
  m.die_radius = get_or(j, "die_radius", m.die_radius);
  m.punch_offset = get_or(j, "punch_offset", m.punch_offset);
  m.punch_radius = get_or(j, "punch_radius", m.punch_radius);
  m.cw_limit = get_or(j, "cw_limit", m.cw_limit);
  m.ccw_limit = get_or(j, "ccw_limit", m.ccw_limit);
  m.contact_slack = get_or(j, "contact_slack", m.contact_slack);
  if (j.contains("housing")) {
    m.housing.pose = pose_from_json(j["housing"].at("pose"));
    m.housing.half_extents = vec_from(j["housing"].at("half_extents"), "housing.half_extents");
  }
  m.validate();
  return m;
}

Json to_json(const RobotModel& r) {
  Json joints = Json::array();
  for (const auto& jt : r.joints) {
    joints.push_back(Json{{"name", jt.name}, {"origin", to_json(jt.origin)}, {"axis", vec(jt.axis)},
                          {"lower", jt.lower}, {"upper", jt.upper}});
  }
  Json caps = Json::array();
  for (const auto& c : r.capsules) {
    caps.push_back(Json{{"name", c.name}, {"link", c.link}, {"a", vec(c.a)}, {"b", vec(c.b)},
                        {"radius", c.radius}, {"gripper", c.gripper}});
  }
  Json env = Json::array();
  for (const auto& b : r.base_envelope) env.push_back(to_json(b));
  return Json{{"name", r.name},   {"base", to_json(r.base)},        {"joints", joints},
              {"tool", to_json(r.tool)}, {"capsules", caps}, {"base_envelope", env},
              {"home", std::vector<double>(r.home.data(), r.home.data() + r.home.size())}};
}

RobotModel robot_from_json(const Json& j) {
  if (j.contains("preset")) {
    const auto preset = j["preset"].get<std::string>();
    if (preset != "ur3e") throw Error(ErrorCode::ParseError, "unknown robot preset '" + preset + "'");
    RobotModel r = RobotModel::ur3e();
    if (j.contains("base")) r.base = pose_from_json(j["base"]);
    r.validate();
    return r;
  }
  RobotModel r;
  r.name = get_or<std::string>(j, "name", "robot");
  if (j.contains("base")) r.base = pose_from_json(j["base"]);
  for (const auto& jt : j.at("joints")) {
    Joint joint;
    joint.name = get_or<std::string>(jt, "name", "joint");
    joint.origin = pose_from_json(jt.at("origin"));
    joint.axis = vec_from(jt.at("axis"), "axis").normalized();
    joint.lower = jt.at("lower").get<double>();
    joint.upper = jt.at("upper").get<double>();
    r.joints.push_back(joint);
  }
  if (j.contains("tool")) r.tool = pose_from_json(j["tool"]);
  for (const auto& c : get_or(j, "capsules", Json::array())) {
    r.capsules.push_back({get_or<std::string>(c, "name", "link"), c.at("link").get<int>(), vec_from(c.at("a"), "a"),
                          vec_from(c.at("b"), "b"), c.at("radius").get<double>(), get_or(c, "gripper", false)});
  }
  for (const auto& b : get_or(j, "base_envelope", Json::array())) r.base_envelope.push_back(body_from_json(b));
  const auto home = j.at("home").get<std::vector<double>>();
  r.home = Eigen::Map<const JointConfig>(home.data(), static_cast<Eigen::Index>(home.size()));
  r.validate();
  return r;
}

Json to_json(const WorldConfig& w) {
  Json bodies = Json::array();
  for (const auto& b : w.bodies) bodies.push_back(to_json(b));
  return Json{{"table_height", w.table_height},
              {"table_center", vec(w.table_center)},
              {"table_half_extents", vec(w.table_half_extents)},
              {"bodies", bodies}};
}

WorldConfig world_from_json(const Json& j) {
  WorldConfig w;
  w.table_height = get_or(j, "table_height", w.table_height);
  if (j.contains("table_center")) w.table_center = vec_from(j["table_center"], "table_center");
  if (j.contains("table_half_extents")) w.table_half_extents = vec_from(j["table_half_extents"], "table_half_extents");
  for (const auto& b : get_or(j, "bodies", Json::array())) w.bodies.push_back(body_from_json(b));
  return w;
}

Json to_json(const GraspConfig& g) {
  Json list = Json::array();
  for (const auto& p : g.explicit_grasps) {
    list.push_back(Json{{"id", p.id}, {"arclength", p.arclength}, {"roll", p.roll}, {"jaw_width", p.jaw_width}});
  }
  return Json{{"spacing", g.spacing}, {"rolls", g.rolls}, {"end_margin", g.end_margin},
              {"jaw_width", g.jaw_width}, {"grasps", list}};
}

GraspConfig grasps_from_json(const Json& j) {
  GraspConfig g;
  g.spacing = get_or(j, "spacing", g.spacing);
  g.rolls = get_or(j, "rolls", g.rolls);
  g.end_margin = get_or(j, "end_margin", g.end_margin);
  g.jaw_width = get_or(j, "jaw_width", g.jaw_width);
  for (const auto& p : get_or(j, "grasps", Json::array())) {
    g.explicit_grasps.push_back({p.at("id").get<int>(), p.at("arclength").get<double>(), get_or(p, "roll", 0.0),
                                 get_or(p, "jaw_width", g.jaw_width)});
  }
  if (!(g.spacing > 0.0) || g.rolls < 1) throw Error(ErrorCode::InvalidArgument, "grasp spacing/rolls must be positive");
  return g;
}

std::vector<GraspPose> make_grasps(const GraspConfig& g, double wire_length) {
  if (!g.explicit_grasps.empty()) return g.explicit_grasps;
  return annotate_grasps(wire_length, g.spacing, g.rolls, g.end_margin, g.jaw_width);
}

Json to_json(const BendSet& s) {
  Json cands = Json::array();
  for (const auto& c : s.candidates) {
    cands.push_back(Json{{"index", c.index},       {"pivot", c.pivot},       {"q", vec(c.q)},
                         {"theta", c.theta},       {"alpha", c.alpha},       {"beta", c.beta},
                         {"side", c.side},         {"turn", c.turn},         {"tangent", c.tangent},
                         {"arclength", c.arclength}, {"q_world", vec(c.q_world)}});
  }
  return Json{{"r_c", s.r_c},
              {"wire", Json{{"diameter", s.wire.diameter}, {"total_length", s.wire.total_length}}},
              {"reference_normal", vec(s.reference_normal)},
              {"tail_length", s.tail_length},
              {"candidates", cands}};
}

BendSet bendset_from_json(const Json& j) {
  BendSet s;
  s.r_c = j.at("r_c").get<double>();
  s.wire.diameter = j.at("wire").at("diameter").get<double>();
  s.wire.total_length = j.at("wire").at("total_length").get<double>();
  s.reference_normal = vec_from(j.at("reference_normal"), "reference_normal");
  s.tail_length = j.at("tail_length").get<double>();
  for (const auto& c : j.at("candidates")) {
    BendCandidate b;
    b.index = c.at("index").get<int>();
    b.pivot = get_or(c, "pivot", -1);
    b.q = vec_from(c.at("q"), "q");
    b.theta = c.at("theta").get<double>();
    b.alpha = c.at("alpha").get<double>();
    b.beta = c.at("beta").get<double>();
    b.side = c.at("side").get<int>();
    b.turn = c.at("turn").get<double>();
    b.tangent = c.at("tangent").get<double>();
    b.arclength = c.at("arclength").get<double>();
    if (c.contains("q_world")) b.q_world = vec_from(c["q_world"], "q_world");
    s.candidates.push_back(b);
  }
  for (std::size_t k = 0; k < s.candidates.size(); ++k) {
    if (s.candidates[k].index != static_cast<int>(k)) throw Error(ErrorCode::ParseError, "bend indices must be 0..n-1");
  }
  return s;
}

Json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

ProjectConfig load_project(const fs::path& path, const fs::path& defaults_dir) {
  const Json j = read_json(path);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "project config must be an object");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const char* key, const char* fallback_name) -> fs::path {
    if (j.contains(key)) {
      fs::path p = j[key].get<std::string>();
      return p.is_absolute() ? p : base / p;
    }
    if (!defaults_dir.empty() && fallback_name && fs::exists(defaults_dir / fallback_name)) {
      return defaults_dir / fallback_name;
    }
    return {};
  };
  try {
    ProjectConfig c;
    c.curve_file = resolve("curve", nullptr);
    if (c.curve_file.empty()) throw Error(ErrorCode::InvalidArgument, "project config needs a 'curve' file");
    c.machine_file = resolve("machine", "machine.json");
    c.robot_file = resolve("robot", "robot.json");
    c.grasp_file = resolve("grasps", "grasps.json");
    c.world_file = resolve("world", "world.json");
    c.epsilon = get_or(j, "epsilon", c.epsilon);
    c.budget = get_or(j, "budget", c.budget);
    c.clearance = get_or(j, "clearance", c.clearance);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.min_bend_angle = get_or(j, "min_bend_angle", c.min_bend_angle);
    c.plan_motion = get_or(j, "plan_motion", c.plan_motion);
    if (j.contains("wire")) {
      c.wire.diameter = get_or(j["wire"], "diameter", c.wire.diameter);
      c.wire.total_length = get_or(j["wire"], "total_length", c.wire.total_length);
    }
    for (const auto& f : {c.curve_file, c.machine_file, c.robot_file, c.grasp_file, c.world_file}) {
      if (!f.empty() && !fs::exists(f)) throw Error(ErrorCode::InvalidArgument, "missing file " + f.string());
    }
    if (!(c.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (!(c.budget > 0.0)) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
    if (!(c.clearance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "clearance must be non-negative");
    if (!(c.wire.diameter > 0.0)) throw Error(ErrorCode::InvalidArgument, "wire diameter must be positive");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
}

Environment make_environment(const WorldConfig& world, const RobotModel& robot) {
  Environment env;
  env.table_height = world.table_height;
  Box table;
  table.pose = Pose(Eigen::Translation3d(world.table_center.x(), world.table_center.y(),
                                         world.table_height - world.table_half_extents.z()));
  table.half_extents = world.table_half_extents;
  env.bodies.push_back({"table", table, false});
  for (const auto& b : robot.base_envelope) env.bodies.push_back({b.name, transformed(b.shape, robot.base), false});
  for (const auto& b : world.bodies) env.bodies.push_back(b);
  return env;
}

MotionSetup make_motion_setup(const PlanningContext& ctx, const RobotModel& robot, const GraspConfig& grasps,
                              std::uint64_t seed) {
  MotionSetup m;
  // The robot's own base envelope must not block the robot itself.
  Environment env = ctx.env;
  std::erase_if(env.bodies, [&](const CollisionBody& b) {
    return std::any_of(robot.base_envelope.begin(), robot.base_envelope.end(),
                       [&](const CollisionBody& e) { return e.name == b.name; });
  });
  m.scene = make_motion_scene(robot, env, ctx.machine, ctx.bends.wire.diameter, ctx.sim.clearance);
  m.grasps = make_grasps(grasps, ctx.bends.wire.total_length);
  m.ik.seed = seed;
  m.motion.seed = seed;
  return m;
}

Scenario build_scenario(ProjectConfig cfg, std::vector<Point3> curve, MachineModel machine, RobotModel robot,
                        WorldConfig world, GraspConfig grasps) {
  Scenario s;
  s.curve = std::move(curve);
  s.pivots = rdp_simplify(s.curve, cfg.epsilon);
  if (s.pivots.size() < 3) s.pivots.insert(s.pivots.begin() + 1, 0.5 * (s.pivots.front() + s.pivots.back()));
  s.machine = machine;
  s.robot = robot;
  s.world = world;
  s.grasp_config = grasps;
  BendOptions bo;
  bo.min_bend_angle = cfg.min_bend_angle;
  s.ctx.bends = compute_bending_set(make_pivot_chain(s.pivots), machine.bend_radius(cfg.wire.diameter), cfg.wire, bo);
  s.ctx.machine = machine;
  s.ctx.env = make_environment(world, robot);
  s.ctx.sim.clearance = cfg.clearance;
  s.motion = make_motion_setup(s.ctx, robot, grasps, cfg.seed);
  s.config = std::move(cfg);
  return s;
}

Scenario load_scenario(const fs::path& config_path, const fs::path& defaults_dir) {
  return scenario_from_project(load_project(config_path, defaults_dir));
}

Scenario scenario_from_project(ProjectConfig cfg) {
  auto curve = read_curve(cfg.curve_file);
  try {
    MachineModel machine = cfg.machine_file.empty() ? MachineModel{} : machine_from_json(read_json(cfg.machine_file));
    RobotModel robot = cfg.robot_file.empty() ? RobotModel::ur3e() : robot_from_json(read_json(cfg.robot_file));
    WorldConfig world = cfg.world_file.empty() ? WorldConfig{} : world_from_json(read_json(cfg.world_file));
    GraspConfig grasps = cfg.grasp_file.empty() ? GraspConfig{} : grasps_from_json(read_json(cfg.grasp_file));
    return build_scenario(std::move(cfg), std::move(curve), machine, robot, world, grasps);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

double polyline_deviation(const std::vector<Point3>& curve, const std::vector<Point3>& pivots) {
  double worst = 0.0;
  for (const auto& p : curve) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < pivots.size(); ++k) best = std::min(best, point_segment_distance(p, pivots[k - 1], pivots[k]));
    if (pivots.size() == 1) best = (p - pivots[0]).norm();
    worst = std::max(worst, best);
  }
  return worst;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

}  // namespace wirebend

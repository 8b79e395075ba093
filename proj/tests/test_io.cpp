#include <doctest.h>

#include <filesystem>
#include <random>

#include "wirebend/error.hpp"
#include "wirebend/plan_doc.hpp"

using namespace wirebend;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    (void)parse_curve(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    return e.what();
  }
  return "";
}

fs::path data(const std::string& name) { return fs::path(WIREBEND_DATA_DIR) / name; }

fs::path scratch_dir(const char* name) {
  const auto d = fs::temp_directory_path() / ("wirebend_test_" + std::string(name));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("curve parsing") {
  const auto pts = parse_curve("# header\n0 0 0\n0.1, 0.0, 0.0\n\n0.1\t0.1\t0 # trailing\n");
  REQUIRE(pts.size() == 3);
  CHECK(pts[2].y() == 0.1);
  CHECK(error_of("0 0 0\n1 2\n").find("line 2") != std::string::npos);
  CHECK(error_of("0 0 0\n0 0 0\n1 x 2\n").find("line 3") != std::string::npos);
  CHECK(error_of("nan 0 0\n").find("line 1") != std::string::npos);
  CHECK(error_of("1 2 3 4\n").find("line 1") != std::string::npos);
}

TEST_CASE("curve file round trip is exact") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  const auto path = scratch_dir("curve") / "c.xyz";
  write_curve(path, pts);
  const auto back = read_curve(path);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(back[i] == pts[i]);
}

TEST_CASE("schema round trips") {
  const auto machine = machine_from_json(read_json(data("machine.json")));
  CHECK(dump(to_json(machine_from_json(to_json(machine)))) == dump(to_json(machine)));
  const auto robot = robot_from_json(read_json(data("robot.json")));
  CHECK(dump(to_json(robot_from_json(to_json(robot)))) == dump(to_json(robot)));
  const auto world = world_from_json(read_json(data("world.json")));
  CHECK(dump(to_json(world_from_json(to_json(world)))) == dump(to_json(world)));
  const auto grasps = grasps_from_json(read_json(data("grasps.json")));
  CHECK(dump(to_json(grasps_from_json(to_json(grasps)))) == dump(to_json(grasps)));

  const auto sc = load_scenario(data("examples/polygon3d.json"));
  const auto j = to_json(sc.ctx.bends);
  const auto back = bendset_from_json(j);
  CHECK(dump(to_json(back)) == dump(j));
  REQUIRE(back.size() == sc.ctx.bends.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back.candidates[k].turn == sc.ctx.bends.candidates[k].turn);
    CHECK(back.candidates[k].arclength == sc.ctx.bends.candidates[k].arclength);
  }
}

TEST_CASE("preset robot equals the full description") {
  const auto a = robot_from_json(Json{{"preset", "ur3e"}});
  const auto b = robot_from_json(read_json(data("robot.json")));
  CHECK(dump(to_json(a)) == dump(to_json(b)));
}

TEST_CASE("wire states survive json exactly") {
  auto w = WireState::straight(0.3, 0.002);
  BendAction a;
  a.arclength = 0.1;
  a.roll = 0.3;
  a.turn = 1.1;
  a.radius = 0.009;
  w = apply_bend(w, a);
  w.pose.translate(Vec3(0.1, -0.2, 0.3));
  w.pose.rotate(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  const auto back = wire_from_json(Json::parse(dump(wire_to_json(w))));
  CHECK(dump(wire_to_json(back)) == dump(wire_to_json(w)));
  CHECK((back.pose.matrix() - w.pose.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("project validation") {
  const auto dir = scratch_dir("project");
  write_text(dir / "c.xyz", "0 0 0\n0.1 0 0\n0.1 0.1 0\n");
  write_text(dir / "ok.json", R"({"curve": "c.xyz", "epsilon": 0.001})");
  CHECK_NOTHROW(load_project(dir / "ok.json"));
  write_text(dir / "missing.json", R"({"curve": "nope.xyz"})");
  CHECK_THROWS_AS(load_project(dir / "missing.json"), Error);
  write_text(dir / "eps.json", R"({"curve": "c.xyz", "epsilon": 0})");
  CHECK_THROWS_AS(load_project(dir / "eps.json"), Error);
  write_text(dir / "bad.json", R"({"curve": "c.xyz", "epsilon": )");
  try {
    (void)load_project(dir / "bad.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  write_text(dir / "nocurve.json", R"({"epsilon": 0.001})");
  CHECK_THROWS_AS(load_project(dir / "nocurve.json"), Error);

  // Files the project omits come from the defaults directory.
  const auto cfg = load_project(dir / "ok.json", data(""));
  CHECK(cfg.machine_file == data("machine.json"));
}

TEST_CASE("approximation document") {
  const MachineModel m;
  const std::vector<Point3> line{{0, 0, 0}, {0.05, 0, 0}, {0.1, 0, 0}};
  const auto straight = approximation_document(line, 0.001, 0.0016, m, 0.01);
  CHECK(straight["bending_set"]["candidates"].empty());
  CHECK(straight["warnings"].size() == 1);

  std::vector<Point3> ell;
  for (int i = 0; i <= 10; ++i) ell.emplace_back(0.01 * i, 0, 0);
  for (int i = 1; i <= 10; ++i) ell.emplace_back(0.1, 0.01 * i, 0);
  const auto doc = approximation_document(ell, 0.001, 0.0016, m, 0.01);
  REQUIRE(doc["bending_set"]["candidates"].size() == 1);
  CHECK(doc["max_deviation"].get<double>() <= 0.001);
  CHECK(doc["provenance"]["input_points"] == 21);
  CHECK(doc["provenance"]["pivots"] == 3);
}

TEST_CASE("plan documents replay and are reproducible") {
  const auto sc = load_scenario(data("examples/polygon2d.json"));
  auto plan = [&] {
    GraspVerdictCache cache;
    const auto res =
        prune_search(sc.ctx, [&](const Evaluation& e) { return check_motion(e, sc.ctx, sc.motion, &cache); });
    REQUIRE(res.status == SearchStatus::Found);
    return dump(make_plan_document(sc, res, input_digest(sc)));
  };
  const auto a = plan();
  CHECK(a == plan());
  const auto doc = Json::parse(a);
  const auto v = replay_plan(doc);
  CHECK_MESSAGE(v.ok, v.what);
  CHECK(v.steps_checked == static_cast<int>(sc.ctx.bends.size()));
  CHECK(v.waypoints_checked > 0);

  SUBCASE("edited bend angle diverges") {
    auto edited = doc;
    edited["sequence"][1]["achieved_angle"] = edited["sequence"][1]["achieved_angle"].get<double>() + 1e-3;
    const auto e = replay_plan(edited);
    CHECK_FALSE(e.ok);
    CHECK(e.step == 1);
  }
  SUBCASE("edited wire state diverges") {
    auto edited = doc;
    edited["steps"][0]["bent"]["primitives"][1]["length"] =
        edited["steps"][0]["bent"]["primitives"][1]["length"].get<double>() + 1e-6;
    const auto e = replay_plan(edited);
    CHECK_FALSE(e.ok);
    CHECK(e.step == 0);
  }
  SUBCASE("edited waypoint is caught") {
    auto edited = doc;
    auto& wp = edited["trajectories"][1]["waypoints"];
    wp[wp.size() / 2][1] = -3.0;
    CHECK_FALSE(replay_plan(edited).ok);
  }
  SUBCASE("meshes") {
    const auto meshes = plan_meshes(doc);
    CHECK(meshes.size() == sc.ctx.bends.size() + 1);
    CHECK(meshes.front().first == "step_00.stl");
    CHECK(meshes.front().second.rfind("solid step_00", 0) == 0);
  }
}

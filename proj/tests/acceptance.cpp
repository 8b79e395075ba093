// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "motion_oracle.hpp"
#include "oracles.hpp"
#include "search_oracle.hpp"
#include "wirebend/benchmark.hpp"
#include "wirebend/error.hpp"
#include "wirebend/plan_doc.hpp"

using namespace wirebend;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const fs::path kData = WIREBEND_DATA_DIR;

int failures = 0;

void verdict(int k, bool ok, const std::string& what, const std::string& detail) {
  std::printf("CRITERION %d %s: %s (%s)\n", k, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<Point3> random_chain(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> len(0.05, 0.15);
  std::uniform_real_distribution<double> turn(0.2, 2.6);
  std::uniform_real_distribution<double> roll(-M_PI, M_PI);
  std::vector<Point3> p{Point3::Zero(), Point3(len(rng), 0, 0)};
  Vec3 x = Vec3::UnitX(), z = Vec3::UnitZ();
  for (int i = 2; i < n; ++i) {
    const Vec3 axis = Eigen::AngleAxisd(roll(rng), x) * z;
    const Vec3 u = Eigen::AngleAxisd(turn(rng), axis) * x;
    p.push_back(p.back() + len(rng) * u);
    z = x.cross(u).normalized();
    x = u;
  }
  return p;
}

void criterion1() {
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  double worst = 0.0;
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto pivots = random_chain(rng, 4 + t % 7);
    try {
      const auto set = compute_bending_set(make_pivot_chain(pivots), 0.005, {});
      const auto back = reconstruct_pivots(set, {pivots[0], pivots[1]});
      if (back.size() != pivots.size()) {
        ++bad;
        continue;
      }
      for (std::size_t i = 0; i < back.size(); ++i) worst = std::max(worst, (back[i] - pivots[i]).cwiseAbs().maxCoeff());
    } catch (const Error&) {
      ++bad;
    }
  }
  const double dt = since(t0);
  verdict(1, bad == 0 && worst <= 1e-6 && dt < 10.0, "bend set round trip on 1000 random chains",
          fmt("max coordinate error %.3g m, %.0f failures, %.2f s", worst, bad, dt));
}

void criterion2() {
  const auto t0 = Clock::now();
  std::mt19937 rng(77);
  int mismatches = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto curve = oracle::random_walk(rng, 2 + static_cast<int>(rng() % 499), t % 3 == 0);
    const double eps = 0.0005 * (1 + t % 40);
    const auto got = rdp_simplify_indices(curve, eps);
    if (got != oracle::rdp(curve, eps)) ++mismatches;
    // exhaustive point-to-polyline distance over the output
    std::vector<Point3> poly;
    for (auto i : got) poly.push_back(curve[i]);
    double dev = 0.0;
    for (const auto& p : curve) {
      double best = 1e300;
      for (std::size_t k = 1; k < poly.size(); ++k) best = std::min(best, oracle::seg_dist(p, poly[k - 1], poly[k]));
      dev = std::max(dev, best);
    }
    worst_ratio = std::max(worst_ratio, dev / eps);
  }
  const double dt = since(t0);
  verdict(2, mismatches == 0 && worst_ratio <= 1.0 && dt < 10.0, "RDP on 100 random curves",
          fmt("%.0f mismatches vs recursive reference, max deviation/epsilon %.3f, %.2f s", mismatches, worst_ratio, dt));
}

void criterion3() {
  const auto t0 = Clock::now();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MachineModel m;
  const Environment free_env{{}, -1.0};
  int calls = 0, bad_len = 0, bad_cont = 0, bad_arc = 0, skipped = 0;
  double worst_len = 0.0;
  while (calls < 1000) {
    const double d = u(rng) < 0.5 ? 0.0016 : 0.0026;
    const double len = 0.2 + 0.2 * u(rng);
    auto w = WireState::straight(len, d);
    const double r = m.bend_radius(d);
    for (int k = 0; k < 4 && calls < 1000; ++k) {
      const auto dir = u(rng) < 0.5 ? BendDirection::CW : BendDirection::CCW;
      const bool alpha = u(rng) < 0.5;
      BendAction b;
      b.turn = 0.05 + u(rng) * (max_feasible_angle(d, m, dir) - 0.06);
      b.radius = r;
      b.roll = (2.0 * u(rng) - 1.0) * M_PI;
      b.arclength = 0.03 + u(rng) * (len - 0.06 - r * b.turn);
      SimResult res;
      try {
        const auto posed = pose_wire_for_bend(w, b, m, alpha, dir, free_env);
        res = simulate_bend(posed, b, dir, alpha, m, free_env);
      } catch (const Error&) {
        ++skipped;
        continue;
      }
      ++calls;
      const WireState& out = res.wire;
      const double err = std::abs(out.length() - len);
      worst_len = std::max(worst_len, err);
      if (err > 1e-9) ++bad_len;
      if (max_position_gap(out) > 1e-9 || max_tangent_gap(out) > 1e-6) ++bad_cont;
      // one primitive per location: the new arc owns the whole bent interval
      double covered = 0.0;
      for (const auto& p : out.primitives) covered += p.length;
      const double swept = r * res.achieved_angle;
      const double start = alpha ? b.arclength : b.end() - swept;
      bool arc_ok = std::abs(covered - len) < 1e-9;
      if (swept > 1e-9) {
        const std::size_t at = out.locate(start + 0.5 * swept).first;
        double owner_start = 0.0;
        for (std::size_t i = 0; i < at; ++i) owner_start += out.primitives[i].length;
        const auto& owner = out.primitives[at];
        arc_ok = arc_ok && owner.kind == WirePrimitive::Kind::Arc && std::abs(owner_start - start) < 1e-9 &&
                 std::abs(owner.length - swept) < 1e-9;
      }
      if (!arc_ok) ++bad_arc;
      w = out;
      w.pose = Pose::Identity();
    }
  }
  const double dt = since(t0);
  std::ostringstream s;
  s << calls << " calls, max length error " << worst_len << " m, " << bad_len << " length / " << bad_cont
    << " continuity / " << bad_arc << " override violations, " << skipped << " unposable draws skipped, " << dt << " s";
  verdict(3, bad_len == 0 && bad_cont == 0 && bad_arc == 0 && dt < 30.0, "simulator conservation", s.str());
}

Scenario random_scenario(int n, std::uint64_t seed) {
  const auto machine = machine_from_json(read_json(kData / "machine.json"));
  std::mt19937_64 rng(seed);
  ProjectConfig cfg;
  cfg.epsilon = 1e-7;
  cfg.seed = seed;
  return build_scenario(cfg, random_bend_polyline(n, rng, machine.bend_radius(cfg.wire.diameter)), machine,
                        robot_from_json(read_json(kData / "robot.json")), world_from_json(read_json(kData / "world.json")),
                        grasps_from_json(read_json(kData / "grasps.json")));
}

void criterion4() {
  const auto t0 = Clock::now();
  int disagree = 0, over = 0, feasible = 0, with_motion = 0;
  double pruned_total = 0, exhaustive_total = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 3 + i % 4;
    const auto sc = random_scenario(n, 1000 + static_cast<std::uint64_t>(i));
    const bool motion = n == 3;
    GraspVerdictCache cache;
    const MotionOracle oracle = [&](const Evaluation& e) {
      return motion ? check_motion(e, sc.ctx, sc.motion, &cache) : MotionVerdict{};
    };
    SearchOptions so;
    so.budget = 1e9;
    so.keep_trace = false;
    const auto res = prune_search(sc.ctx, oracle, so);
    std::function<bool(const BendSequence&)> full_ok;
    if (motion) {
      ++with_motion;
      full_ok = [&](const BendSequence& s) { return check_motion(evaluate_sequence(s, sc.ctx), sc.ctx, sc.motion).ok; };
    }
    const auto ref = oracle::exhaustive_search(sc.ctx, full_ok);
    const bool found = res.status == SearchStatus::Found;
    if (found != ref.feasible) {
      ++disagree;
      std::printf("  instance %d (n=%d): pruned %s, exhaustive %s\n", i, n, to_string(res.status),
                  ref.feasible ? "feasible" : "infeasible");
    }
    if (static_cast<double>(res.stats.nodes_explored) > ref.nodes) ++over;
    feasible += ref.feasible;
    pruned_total += static_cast<double>(res.stats.nodes_explored);
    exhaustive_total += ref.nodes;
  }
  const double dt = since(t0);
  std::ostringstream s;
  s << "50 instances (" << feasible << " feasible, " << with_motion << " with motion), " << disagree
    << " feasibility disagreements, " << over << " node-count violations, nodes " << pruned_total << " vs "
    << exhaustive_total << ", " << dt << " s";
  verdict(4, disagree == 0 && over == 0 && dt < 600.0, "pruned search equals exhaustive search", s.str());
}

void criterion5() {
  BenchmarkOptions opts;  // groups 3..8, 10 instances each, 120 s budget
  opts.seed = 1;
  const auto report =
      run_benchmark(machine_from_json(read_json(kData / "machine.json")), robot_from_json(read_json(kData / "robot.json")),
                    world_from_json(read_json(kData / "world.json")), grasps_from_json(read_json(kData / "grasps.json")),
                    opts);
  std::cout << report_table(report);
  const fs::path out = fs::current_path() / "acceptance_benchmark";
  fs::create_directories(out);
  write_text(out / "report.json", dump(report_json(report)));
  write_text(out / "times.dat", timing_data(report));
  write_text(out / "table.txt", report_table(report));

  int slow = 0, timeouts = 0, replay_bad = 0;
  for (const auto& r : report.instances) {
    if (r.status == SearchStatus::Found && r.time > opts.budget) ++slow;
    if (r.status == SearchStatus::Timeout) ++timeouts;
    if (!r.replay_ok) ++replay_bad;
  }
  // Trend: mean failure time against bend count, Spearman rank correlation.
  std::vector<double> x, y;
  for (const auto& g : report.groups) {
    if (g.found == g.instances) continue;
    x.push_back(g.bends);
    y.push_back(g.mean_failure_time);
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0, equal = 0;
      for (double w : v) below += w < v[i], equal += w == v[i];
      r[i] = below + 0.5 * (equal + 1);
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double sxy = 0, sxx = 0, syy = 0;
  const double mx = (x.size() + 1) / 2.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - mx);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - mx) * (ry[i] - mx);
  }
  const double rho = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  const bool trend = y.size() >= 2 && y.back() > y.front() && rho > 0.0;
  std::ostringstream s;
  s << report.instances.size() << " instances, " << timeouts << " timeouts, " << slow << " solved past budget, "
    << replay_bad << " replay failures, failure-time rank correlation with bend count " << rho
    << ", report in " << out.string();
  verdict(5, slow == 0 && timeouts == 0 && replay_bad == 0 && trend, "benchmark timing and failure-time trend", s.str());
}

void criterion6() {
  const auto t0 = Clock::now();
  const auto robot = RobotModel::ur3e();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  IkOptions ik;
  int solved = 0, bad_residual = 0;
  for (int t = 0; t < 1000; ++t) {
    JointConfig q(robot.dof());
    for (std::size_t k = 0; k < robot.dof(); ++k) q[k] = u(rng);
    const Pose target = forward_kinematics(robot, q);
    ik.seed = static_cast<std::uint64_t>(t);
    try {
      const auto sol = solve_ik(robot, target, robot.home, ik);
      const auto [pe, re] = pose_error(forward_kinematics(robot, sol), target);
      if (pe > 1e-4 || re > 1e-3) ++bad_residual;
      else ++solved;
    } catch (const Error&) {
    }
  }
  // Waypoints of planned trajectories: bundled examples plus benchmark plans.
  int plans = 0, waypoints = 0, hits = 0;
  std::string first_hit;
  auto check_doc = [&](const Json& doc) {
    int c = 0;
    const auto r = oracle::check_plan_waypoints(doc, &c);
    ++plans;
    waypoints += c;
    if (r.hit) {
      ++hits;
      if (first_hit.empty()) first_hit = r.what;
    }
  };
  for (const char* name : {"polygon2d.json", "polygon3d.json", "reorder3.json"}) {
    const auto sc = load_scenario(kData / "examples" / name);
    GraspVerdictCache cache;
    const auto res = prune_search(sc.ctx, [&](const Evaluation& e) { return check_motion(e, sc.ctx, sc.motion, &cache); });
    if (res.status == SearchStatus::Found) check_doc(make_plan_document(sc, res, input_digest(sc)));
  }
  for (std::uint64_t seed = 1; seed <= 40 && since(t0) < 90.0; ++seed) {
    const auto sc = random_scenario(3 + static_cast<int>(seed % 3), 5000 + seed);
    GraspVerdictCache cache;
    SearchOptions so;
    so.budget = 20.0;
    so.keep_trace = false;
    const auto res =
        prune_search(sc.ctx, [&](const Evaluation& e) { return check_motion(e, sc.ctx, sc.motion, &cache); }, so);
    if (res.status == SearchStatus::Found) check_doc(make_plan_document(sc, res, input_digest(sc)));
  }
  const double dt = since(t0);
  std::ostringstream s;
  s << solved << "/1000 IK solved within tolerance (" << bad_residual << " over tolerance), " << plans << " plans, "
    << waypoints << " waypoints, " << hits << " oracle hits" << (first_hit.empty() ? "" : " first: " + first_hit) << ", "
    << dt << " s";
  verdict(6, solved >= 990 && bad_residual == 0 && hits == 0 && plans >= 3 && dt < 120.0, "motion layer", s.str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion7() {
  const auto t0 = Clock::now();
  const std::string cli = WIREBEND_CLI;
  const fs::path root = fs::temp_directory_path() / "wirebend_acceptance";
  fs::remove_all(root);
  bool ok = true;
  std::ostringstream s;
  for (const char* name : {"polygon2d", "polygon3d"}) {
    const auto cfg = kData / "examples" / (std::string(name) + ".json");
    std::vector<fs::path> dirs{root / name / "a", root / name / "b"};
    for (const auto& d : dirs) {
      const std::string cmd = "\"" + cli + "\" plan \"" + cfg.string() + "\" -o \"" + d.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        s << name << ": plan failed; ";
      }
    }
    const std::string rep = "\"" + cli + "\" replay \"" + (dirs[0] / "plan.json").string() + "\" > /dev/null";
    const bool replay_ok = std::system(rep.c_str()) == 0;
    bool same = fs::exists(dirs[0] / "plan.json");
    int files = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++files;
      const auto other = dirs[1] / e.path().filename();
      same = same && fs::exists(other) && slurp(e.path()) == slurp(other);
    }
    ok = ok && replay_ok && same;
    s << name << ": replay " << (replay_ok ? "ok" : "FAILED") << ", " << files << " files "
      << (same ? "identical" : "DIFFER") << "; ";
  }
  s << since(t0) << " s";
  verdict(7, ok, "end-to-end reproducibility via the CLI", s.str());
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::function<void()>> all{criterion1, criterion2, criterion3, criterion4,
                                         criterion5, criterion6, criterion7};
  for (int k = 0; k < static_cast<int>(all.size()); ++k) {
    if (argc > 1 && std::atoi(argv[1]) != k + 1) continue;
    try {
      all[k]();
    } catch (const std::exception& e) {
      verdict(k + 1, false, "unexpected exception", e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}

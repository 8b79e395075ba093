#include "wirebend/benchmark.hpp"

#include <cstdio>
#include <sstream>

#include "wirebend/error.hpp"
#include "wirebend/plan_doc.hpp"

namespace wirebend {

namespace {

constexpr double kMinTurn = 2.0 * std::numbers::pi / 180.0;
constexpr double kGapMin = 0.005;
constexpr double kGapExtra = 0.03;
constexpr double kLeadMin = 0.08;
constexpr double kLeadMax = 0.10;

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }

}  // namespace

std::vector<Point3> random_bend_polyline(int n, std::mt19937_64& rng, double bend_radius) {
  std::uniform_real_distribution<double> full(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> lift(-std::numbers::pi / 18.0, std::numbers::pi / 18.0);
  std::uniform_real_distribution<double> gap(kGapMin, kGapMin + kGapExtra);
  std::uniform_real_distribution<double> lead(kLeadMin, kLeadMax);

  std::vector<Vec3> dirs{Vec3::UnitX()};
  std::vector<double> tangents;
  Vec3 x = Vec3::UnitX(), z = Vec3::UnitZ();
  for (int k = 0; k < n; ++k) {
    Vec3 u_local;
    for (;;) {
      const double theta = full(rng);
      const double alpha = full(rng);
      const double beta = lift(rng);
      const double psi = std::numbers::pi - std::abs(theta);
      const double side = theta < 0.0 ? -1.0 : 1.0;
      u_local = rot_x(alpha) * Vec3(std::cos(psi), side * std::sin(psi), std::cos(psi) * std::tan(beta)).normalized();
      const double turn = std::acos(std::clamp(u_local.x(), -1.0, 1.0));
      if (turn > kMinTurn && turn < std::numbers::pi - kMinTurn) break;
    }
    Mat3 f;
    f << x, z.cross(x), z;
    const Vec3 u = (f * u_local).normalized();
    tangents.push_back(bend_radius * std::tan(0.5 * std::acos(std::clamp(u_local.x(), -1.0, 1.0))));
    z = x.cross(u).normalized();
    x = u;
    dirs.push_back(u);
  }

  std::vector<Point3> pts{Point3::Zero()};
  for (int k = 0; k <= n; ++k) {
    double len;
    if (k == 0) len = tangents[0] + lead(rng);
    else if (k == n) len = tangents[n - 1] + lead(rng);
    else len = tangents[k - 1] + tangents[k] + gap(rng);
    pts.push_back(pts.back() + len * dirs[k]);
  }
  return pts;
}

std::vector<GroupSummary> summarize(const std::vector<InstanceResult>& instances) {
  std::vector<GroupSummary> out;
  for (const auto& r : instances) {
    auto it = std::find_if(out.begin(), out.end(), [&](const GroupSummary& g) { return g.bends == r.bends; });
    if (it == out.end()) {
      out.push_back(GroupSummary{});
      it = out.end() - 1;
      it->bends = r.bends;
    }
    ++it->instances;
    if (r.status == SearchStatus::Found) {
      ++it->found;
      it->mean_success_time += r.time;
    } else {
      (r.status == SearchStatus::Timeout ? it->timeouts : it->infeasible) += 1;
      it->mean_failure_time += r.time;
    }
    it->max_time = std::max(it->max_time, r.time);
    it->mean_nodes += static_cast<double>(r.nodes);
  }
  for (auto& g : out) {
    const int failed = g.instances - g.found;
    g.success_rate = g.instances ? static_cast<double>(g.found) / g.instances : 0.0;
    g.mean_success_time = g.found ? g.mean_success_time / g.found : 0.0;
    g.mean_failure_time = failed ? g.mean_failure_time / failed : 0.0;
    g.mean_nodes = g.instances ? g.mean_nodes / g.instances : 0.0;
  }
  std::sort(out.begin(), out.end(), [](const GroupSummary& a, const GroupSummary& b) { return a.bends < b.bends; });
  return out;
}

BenchmarkReport run_benchmark(const MachineModel& machine, const RobotModel& robot, const WorldConfig& world,
                              const GraspConfig& grasps, const BenchmarkOptions& opts,
                              const BenchmarkProgress& progress) {
  if (opts.min_bends < 1 || opts.max_bends < opts.min_bends || opts.per_group < 1) {
    throw Error(ErrorCode::InvalidArgument, "benchmark groups must be non-empty");
  }
  BenchmarkReport report;
  report.options = opts;
  std::mt19937_64 rng(opts.seed);
  for (int n = opts.min_bends; n <= opts.max_bends; ++n) {
    for (int i = 0; i < opts.per_group; ++i) {
      InstanceResult r;
      r.bends = n;
      r.instance = i;
      r.seed = rng();
      std::mt19937_64 local(r.seed);

      ProjectConfig cfg;
      cfg.epsilon = 1e-7;
      cfg.budget = opts.budget;
      cfg.clearance = opts.clearance;
      cfg.seed = r.seed;
      cfg.wire.diameter = opts.wire_diameter;
      cfg.plan_motion = opts.plan_motion;
      auto pts = random_bend_polyline(n, local, machine.bend_radius(opts.wire_diameter));
      const Scenario sc = build_scenario(cfg, std::move(pts), machine, robot, world, grasps);

      r.static_infeasible = !statically_infeasible_bends(sc.ctx).empty();
      GraspVerdictCache verdicts;
      const MotionOracle oracle = [&](const Evaluation& e) {
        return opts.plan_motion ? check_motion(e, sc.ctx, sc.motion, &verdicts) : MotionVerdict{};
      };
      const auto res = prune_search(sc.ctx, oracle, SearchOptions{opts.budget, false});
      r.status = res.status;
      r.reason = res.reason;
      r.time = res.stats.wall_time;
      r.nodes = res.stats.nodes_explored;
      r.sequences = res.stats.sequences_evaluated;
      r.motion_calls = res.stats.motion_calls;
      if (res.status == SearchStatus::Found) {
        const Json doc = make_plan_document(sc, res, input_digest(sc));
        const std::string text = dump(doc);
        r.plan_digest = sha256_hex(text);
        if (opts.replay) r.replay_ok = replay_plan(Json::parse(text)).ok;
      }
      if (progress) progress(r);
      report.instances.push_back(std::move(r));
    }
  }
  report.groups = summarize(report.instances);
  return report;
}

Json report_json(const BenchmarkReport& r) {
  Json inst = Json::array();
  for (const auto& i : r.instances) {
    inst.push_back(Json{{"bends", i.bends},
                        {"instance", i.instance},
                        {"seed", i.seed},
                        {"status", to_string(i.status)},
                        {"reason", i.status == SearchStatus::Timeout ? "" : i.reason},
                        {"static_infeasible", i.static_infeasible},
                        {"replay_ok", i.replay_ok},
                        {"plan_digest", i.plan_digest}});
  }
  Json groups = Json::array();
  for (const auto& g : r.groups) {
    groups.push_back(Json{{"bends", g.bends},
                          {"instances", g.instances},
                          {"found", g.found},
                          {"infeasible", g.infeasible},
                          {"timeouts", g.timeouts},
                          {"success_rate", g.success_rate}});
  }
  const auto& o = r.options;
  return Json{{"format", "wirebend-benchmark"},
              {"options", Json{{"min_bends", o.min_bends},
                               {"max_bends", o.max_bends},
                               {"per_group", o.per_group},
                               {"seed", o.seed},
                               {"budget", o.budget},
                               {"clearance", o.clearance},
                               {"wire_diameter", o.wire_diameter},
                               {"plan_motion", o.plan_motion}}},
              {"groups", groups},
              {"instances", inst}};
}

std::string report_table(const BenchmarkReport& r) {
  std::ostringstream out;
  char buf[160];
  out << "bends  instances  found  infeasible  timeout  success_rate  mean_success_s  mean_failure_s  max_s  mean_nodes\n";
  for (const auto& g : r.groups) {
    std::snprintf(buf, sizeof buf, "%5d  %9d  %5d  %10d  %7d  %11.1f%%  %14.3f  %14.3f  %5.1f  %10.1f\n", g.bends,
                  g.instances, g.found, g.infeasible, g.timeouts, 100.0 * g.success_rate, g.mean_success_time,
                  g.mean_failure_time, g.max_time, g.mean_nodes);
    out << buf;
  }
  return out.str();
}

std::string timing_data(const BenchmarkReport& r) {
  std::ostringstream out;
  char buf[128];
  out << "# bends instance status time_s nodes\n";
  for (const auto& i : r.instances) {
    std::snprintf(buf, sizeof buf, "%d %d %s %.6f %ld\n", i.bends, i.instance, to_string(i.status), i.time, i.nodes);
    out << buf;
  }
  return out.str();
}

}  // namespace wirebend

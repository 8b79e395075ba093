#include "wirebend/wirebend.h"

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "wirebend/benchmark.hpp"
#include "wirebend/error.hpp"
#include "wirebend/plan_doc.hpp"

namespace fs = std::filesystem;
using namespace wirebend;

struct wb_scenario {
  Scenario sc;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

wb_status code_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
      return WB_ERR_PARSE;
    case ErrorCode::IoError:
      return WB_ERR_IO;
    case ErrorCode::InvalidArgument:
      return WB_ERR_ARGUMENT;
    case ErrorCode::DivergenceFound:
      return WB_ERR_DIVERGENCE;
    case ErrorCode::PlanningTimeout:
      return WB_TIMEOUT;
    default:
      return WB_ERR_GEOMETRY;
  }
}

template <class F>
wb_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const Error& e) {
    g_last_error = e.what();
    return code_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("ParseError: ") + e.what();
    return WB_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return WB_ERR_INTERNAL;
  }
}

wb_status fail(wb_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class T, class F>
T load_or(const fs::path& dir, const char* name, F&& parse, T fallback) {
  if (dir.empty() || !fs::exists(dir / name)) return fallback;
  return parse(read_json(dir / name));
}

}  // namespace

extern "C" {

const char* wb_last_error(void) { return g_last_error.c_str(); }

const char* wb_version(void) { return "1.0.0"; }

void wb_string_free(char* s) { std::free(s); }

void wb_benchmark_defaults(wb_benchmark_options* o) {
  if (!o) return;
  const BenchmarkOptions d;
  *o = wb_benchmark_options{d.min_bends, d.max_bends, d.per_group, d.seed,
                            d.budget,    d.clearance, d.wire_diameter, d.plan_motion ? 1 : 0};
}

wb_status wb_approximate(const char* curve_path, double epsilon, double wire_diameter, const char* machine_path,
                         char** document_json) {
  return guarded([&] {
    if (!curve_path) return fail(WB_ERR_ARGUMENT, "curve path is required");
    if (!(epsilon > 0.0)) return fail(WB_ERR_ARGUMENT, "epsilon must be positive");
    if (!(wire_diameter > 0.0)) return fail(WB_ERR_ARGUMENT, "wire diameter must be positive");
    const MachineModel machine = machine_path ? machine_from_json(read_json(machine_path)) : MachineModel{};
    const ProjectConfig defaults;
    put(document_json,
        dump(approximation_document(read_curve(curve_path), epsilon, wire_diameter, machine, defaults.min_bend_angle)));
    return WB_OK;
  });
}

wb_status wb_scenario_load(const char* config_path, const char* defaults_dir, const wb_overrides* ov,
                           wb_scenario** out) {
  return guarded([&] {
    if (!config_path || !out) return fail(WB_ERR_ARGUMENT, "config path and output handle are required");
    *out = nullptr;
    ProjectConfig cfg = load_project(config_path, defaults_dir ? fs::path(defaults_dir) : fs::path());
    if (ov) {
      if (ov->has_epsilon) cfg.epsilon = ov->epsilon;
      if (ov->has_budget) cfg.budget = ov->budget;
      if (ov->has_clearance) cfg.clearance = ov->clearance;
      if (ov->has_seed) cfg.seed = ov->seed;
    }
    if (!(cfg.epsilon > 0.0)) return fail(WB_ERR_ARGUMENT, "epsilon must be positive");
    if (!(cfg.budget > 0.0)) return fail(WB_ERR_ARGUMENT, "budget must be positive");
    if (!(cfg.clearance >= 0.0)) return fail(WB_ERR_ARGUMENT, "clearance must be non-negative");
    *out = new wb_scenario{scenario_from_project(std::move(cfg))};
    return WB_OK;
  });
}

void wb_scenario_free(wb_scenario* s) { delete s; }

int wb_scenario_bend_count(const wb_scenario* s) { return s ? static_cast<int>(s->sc.ctx.bends.size()) : -1; }

wb_status wb_plan(const wb_scenario* s, char** plan_json, char** trace_json) {
  return guarded([&] {
    if (!s) return fail(WB_ERR_ARGUMENT, "null scenario");
    const Scenario& sc = s->sc;
    GraspVerdictCache verdicts;
    const MotionOracle oracle = [&](const Evaluation& e) {
      return sc.config.plan_motion ? check_motion(e, sc.ctx, sc.motion, &verdicts) : MotionVerdict{};
    };
    const auto res = prune_search(sc.ctx, oracle, SearchOptions{sc.config.budget, true});
    put(trace_json, dump(make_trace_document(res)));
    switch (res.status) {
      case SearchStatus::Found:
        put(plan_json, dump(make_plan_document(sc, res, input_digest(sc))));
        return WB_OK;
      case SearchStatus::Timeout:
        return fail(WB_TIMEOUT, "PlanningTimeout: " + res.reason);
      default:
        return fail(WB_INFEASIBLE, "Infeasible: " + res.reason);
    }
  });
}

wb_status wb_replay(const char* plan_json, char** verdict_json) {
  return guarded([&] {
    if (!plan_json) return fail(WB_ERR_ARGUMENT, "null plan");
    const auto v = replay_plan(Json::parse(plan_json));
    put(verdict_json, dump(Json{{"ok", v.ok},
                                {"step", v.step},
                                {"detail", v.what},
                                {"steps_checked", v.steps_checked},
                                {"waypoints_checked", v.waypoints_checked}}));
    if (!v.ok) {
      return fail(WB_ERR_DIVERGENCE, "DivergenceFound: step " + std::to_string(v.step) + ": " + v.what);
    }
    return WB_OK;
  });
}

wb_status wb_export_mesh(const char* plan_json, const char* out_dir, int* files_written) {
  return guarded([&] {
    if (!plan_json || !out_dir) return fail(WB_ERR_ARGUMENT, "plan and output directory are required");
    const auto meshes = plan_meshes(Json::parse(plan_json));
    fs::create_directories(out_dir);
    for (const auto& [name, text] : meshes) write_text(fs::path(out_dir) / name, text);
    if (files_written) *files_written = static_cast<int>(meshes.size());
    return WB_OK;
  });
}

wb_status wb_benchmark(const char* defaults_dir, const wb_benchmark_options* o, const char* out_dir, char** table,
                       void (*progress)(const char*, void*), void* user) {
  return guarded([&] {
    if (!o) return fail(WB_ERR_ARGUMENT, "null options");
    const fs::path dir = defaults_dir ? fs::path(defaults_dir) : fs::path();
    const auto machine = load_or(dir, "machine.json", machine_from_json, MachineModel{});
    const auto robot = load_or(dir, "robot.json", robot_from_json, RobotModel::ur3e());
    const auto world = load_or(dir, "world.json", world_from_json, WorldConfig{});
    const auto grasps = load_or(dir, "grasps.json", grasps_from_json, GraspConfig{});
    BenchmarkOptions opts;
    opts.min_bends = o->min_bends;
    opts.max_bends = o->max_bends;
    opts.per_group = o->per_group;
    opts.seed = o->seed;
    opts.budget = o->budget;
    opts.clearance = o->clearance;
    opts.wire_diameter = o->wire_diameter;
    opts.plan_motion = o->plan_motion != 0;
    if (!(opts.budget > 0.0)) return fail(WB_ERR_ARGUMENT, "budget must be positive");
    const auto report = run_benchmark(machine, robot, world, grasps, opts, [&](const InstanceResult& r) {
      if (!progress) return;
      char line[256];
      std::snprintf(line, sizeof line, "n=%d #%d %s %.3fs nodes=%ld replay=%s", r.bends, r.instance,
                    to_string(r.status), r.time, r.nodes, r.replay_ok ? "ok" : "FAILED");
      progress(line, user);
    });
    const std::string tbl = report_table(report);
    if (out_dir) {
      fs::create_directories(out_dir);
      write_text(fs::path(out_dir) / "report.json", dump(report_json(report)));
      write_text(fs::path(out_dir) / "times.dat", timing_data(report));
      write_text(fs::path(out_dir) / "table.txt", tbl);
    }
    put(table, tbl);
    return WB_OK;
  });
}

}  // extern "C"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wirebend/wirebend.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitDivergence = 4;

struct Owned {
  char* p = nullptr;
  ~Owned() { wb_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int exit_code(wb_status s) {
  switch (s) {
    case WB_OK:
      return kExitOk;
    case WB_INFEASIBLE:
      return kExitInfeasible;
    case WB_TIMEOUT:
      return kExitTimeout;
    case WB_ERR_DIVERGENCE:
      return kExitDivergence;
    default:
      return kExitUsage;
  }
}

int report_error(wb_status s) {
  std::cerr << "error: " << wb_last_error() << "\n";
  return exit_code(s);
}

bool write_file(const fs::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << p << "\n";
    return false;
  }
  return true;
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << p << "\n";
    return std::nullopt;
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("WIREBEND_CONFIG_DIR");
  return env ? env : "";
}

// Pulls "key": value for a top-level number out of the library's JSON text.
std::string json_field(const std::string& json, const std::string& key) {
  const auto at = json.find("\"" + key + "\":");
  if (at == std::string::npos) return "";
  auto start = at + key.size() + 3;
  while (start < json.size() && json[start] == ' ') ++start;
  auto end = json.find_first_of(",\n}", start);
  return json.substr(start, end - start);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plans robot wire bending with an external bending machine."};
  app.require_subcommand(1);
  std::string cfg_dir;
  app.add_option("--config-dir", cfg_dir, "Directory with default machine/robot/grasps/world files (else $WIREBEND_CONFIG_DIR)");

  // approximate
  auto* approx = app.add_subcommand("approximate", "Simplify a curve and extract its bending set");
  std::string curve;
  double epsilon = 0.001, diameter = 0.0016;
  std::string out_dir = "out";
  std::string machine_file;
  approx->add_option("curve", curve, "x y z per line, meters")->required()->check(CLI::ExistingFile);
  approx->add_option("-e,--epsilon", epsilon, "Simplification tolerance (m)")->check(CLI::PositiveNumber);
  approx->add_option("-d,--diameter", diameter, "Wire diameter (m)")->check(CLI::PositiveNumber);
  approx->add_option("--machine", machine_file, "Machine file")->check(CLI::ExistingFile);
  approx->add_option("-o,--output", out_dir, "Output directory");

  // plan
  auto* plan = app.add_subcommand("plan", "Search a bending sequence and robot motion");
  std::string project;
  std::optional<double> p_epsilon, p_budget, p_clearance;
  std::optional<std::uint64_t> p_seed;
  plan->add_option("config", project, "Project config")->required()->check(CLI::ExistingFile);
  plan->add_option("-e,--epsilon", p_epsilon, "Override simplification tolerance (m)");
  plan->add_option("-b,--budget", p_budget, "Override search budget (s)");
  plan->add_option("-s,--seed", p_seed, "Override seed");
  plan->add_option("-c,--clearance", p_clearance, "Override clearance (m)");
  plan->add_option("-o,--output", out_dir, "Output directory");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Randomized success-rate benchmark");
  wb_benchmark_options bopts;
  wb_benchmark_defaults(&bopts);
  bool no_motion = false, quiet = false;
  bench->add_option("--min-bends", bopts.min_bends)->check(CLI::PositiveNumber);
  bench->add_option("--max-bends", bopts.max_bends)->check(CLI::PositiveNumber);
  bench->add_option("-n,--per-group", bopts.per_group)->check(CLI::PositiveNumber);
  bench->add_option("-s,--seed", bopts.seed);
  bench->add_option("-b,--budget", bopts.budget, "Per-instance budget (s)")->check(CLI::PositiveNumber);
  bench->add_option("-c,--clearance", bopts.clearance)->check(CLI::NonNegativeNumber);
  bench->add_option("-d,--diameter", bopts.wire_diameter)->check(CLI::PositiveNumber);
  bench->add_flag("--no-motion", no_motion, "Skip grasp and motion planning");
  bench->add_flag("-q,--quiet", quiet);
  bench->add_option("-o,--output", out_dir, "Output directory");

  // replay
  auto* replay = app.add_subcommand("replay", "Re-simulate a plan and check its trajectories");
  std::string plan_file;
  replay->add_option("plan", plan_file)->required()->check(CLI::ExistingFile);

  // export-mesh
  auto* mesh = app.add_subcommand("export-mesh", "Write STL snapshots of a plan");
  mesh->add_option("plan", plan_file)->required()->check(CLI::ExistingFile);
  mesh->add_option("-o,--output", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  const std::string defaults = config_dir(cfg_dir);

  if (*approx) {
    if (machine_file.empty() && !defaults.empty() && fs::exists(fs::path(defaults) / "machine.json")) {
      machine_file = (fs::path(defaults) / "machine.json").string();
    }
    Owned doc;
    const auto s = wb_approximate(curve.c_str(), epsilon, diameter, machine_file.empty() ? nullptr : machine_file.c_str(), &doc.p);
    if (s != WB_OK) return report_error(s);
    const auto text = doc.str();
    if (text.find("curve is straight") != std::string::npos) std::cerr << "warning: curve is straight, no bends\n";
    const auto path = fs::path(out_dir) / "bending_set.json";
    if (!write_file(path, text)) return kExitUsage;
    std::cout << "candidates " << json_field(text, "candidates") << "\n";
    std::cout << "max deviation " << json_field(text, "max_deviation") << " m (epsilon " << epsilon << ")\n";
    std::cout << "wrote " << path.string() << "\n";
    return kExitOk;
  }

  if (*plan) {
    wb_overrides ov{};
    if (p_epsilon) ov.has_epsilon = 1, ov.epsilon = *p_epsilon;
    if (p_budget) ov.has_budget = 1, ov.budget = *p_budget;
    if (p_clearance) ov.has_clearance = 1, ov.clearance = *p_clearance;
    if (p_seed) ov.has_seed = 1, ov.seed = *p_seed;
    wb_scenario* sc = nullptr;
    auto s = wb_scenario_load(project.c_str(), defaults.empty() ? nullptr : defaults.c_str(), &ov, &sc);
    if (s != WB_OK) return report_error(s);
    std::cout << "bends " << wb_scenario_bend_count(sc) << "\n";
    Owned plan_json, trace_json;
    s = wb_plan(sc, &plan_json.p, &trace_json.p);
    wb_scenario_free(sc);
    if (s == WB_OK) {
      const auto path = fs::path(out_dir) / "plan.json";
      if (!write_file(path, plan_json.str())) return kExitUsage;
      int files = 0;
      const auto m = wb_export_mesh(plan_json.p, out_dir.c_str(), &files);
      if (m != WB_OK) return report_error(m);
      std::cout << "plan found, wrote " << path.string() << " and " << files << " meshes\n";
      return kExitOk;
    }
    if (trace_json.p) {
      const auto path = fs::path(out_dir) / "trace.json";
      if (write_file(path, trace_json.str())) std::cerr << "search trace in " << path.string() << "\n";
    }
    return report_error(s);
  }

  if (*bench) {
    bopts.plan_motion = no_motion ? 0 : 1;
    auto progress = [](const char* line, void* user) {
      if (!*static_cast<bool*>(user)) std::cerr << line << "\n";
    };
    Owned table;
    const auto s = wb_benchmark(defaults.empty() ? nullptr : defaults.c_str(), &bopts, out_dir.c_str(), &table.p,
                                progress, &quiet);
    if (s != WB_OK) return report_error(s);
    std::cout << table.str();
    std::cout << "wrote report.json, times.dat, table.txt to " << out_dir << "\n";
    return kExitOk;
  }

  if (*replay) {
    const auto text = read_file(plan_file);
    if (!text) return kExitUsage;
    Owned verdict;
    const auto s = wb_replay(text->c_str(), &verdict.p);
    if (s == WB_OK) {
      std::cout << "OK: " << json_field(verdict.str(), "steps_checked") << " steps, "
                << json_field(verdict.str(), "waypoints_checked") << " waypoints\n";
      return kExitOk;
    }
    return report_error(s);
  }

  if (*mesh) {
    const auto text = read_file(plan_file);
    if (!text) return kExitUsage;
    int files = 0;
    const auto s = wb_export_mesh(text->c_str(), out_dir.c_str(), &files);
    if (s != WB_OK) return report_error(s);
    std::cout << "wrote " << files << " meshes to " << out_dir << "\n";
    return kExitOk;
  }
  return kExitUsage;
}

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wirebend/io.hpp"

namespace wirebend {

struct BenchmarkOptions {
  int min_bends = 3;
  int max_bends = 8;
  int per_group = 10;
  std::uint64_t seed = 1;
  double budget = 120.0;
  double clearance = 0.001;
  double wire_diameter = 0.0016;
  bool plan_motion = true;
  bool replay = true;
};

/// Random polyline with `n` bends: per bend θ ∈ [−π, π] (interior angle |θ|,
/// side from the sign), α ∈ [−π, π] roll of the bend plane, β ∈ [−π/18, π/18]
/// lift. Consecutive bend arcs are separated by at least 5 mm of straight wire.
std::vector<Point3> random_bend_polyline(int n, std::mt19937_64& rng, double bend_radius);

struct InstanceResult {
  int bends = 0;
  int instance = 0;
  std::uint64_t seed = 0;
  SearchStatus status = SearchStatus::Infeasible;
  std::string reason;
  double time = 0.0;
  long nodes = 0;
  long sequences = 0;
  long motion_calls = 0;
  bool static_infeasible = false;
  bool replay_ok = true;
  std::string plan_digest;  // sha256 of the plan document, empty unless found
};

struct GroupSummary {
  int bends = 0;
  int instances = 0;
  int found = 0;
  int infeasible = 0;
  int timeouts = 0;
  double success_rate = 0.0;
  double mean_success_time = 0.0;
  double mean_failure_time = 0.0;
  double max_time = 0.0;
  double mean_nodes = 0.0;
};

struct BenchmarkReport {
  BenchmarkOptions options;
  std::vector<InstanceResult> instances;
  std::vector<GroupSummary> groups;
};

using BenchmarkProgress = std::function<void(const InstanceResult&)>;

BenchmarkReport run_benchmark(const MachineModel& machine, const RobotModel& robot, const WorldConfig& world,
                              const GraspConfig& grasps, const BenchmarkOptions& opts,
                              const BenchmarkProgress& progress = {});

std::vector<GroupSummary> summarize(const std::vector<InstanceResult>& instances);

/// Report without wall-clock values (stable across runs with the same seed).
Json report_json(const BenchmarkReport& r);
/// Success rate per bend count, one row per group.
std::string report_table(const BenchmarkReport& r);
/// Whitespace separated columns: bends instance status time nodes.
std::string timing_data(const BenchmarkReport& r);

}  // namespace wirebend

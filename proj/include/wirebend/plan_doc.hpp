#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wirebend/io.hpp"

namespace wirebend {

Json wire_to_json(const WireState& w);
WireState wire_from_json(const Json& j);

/// Exact 3x4 matrix form, used where replay needs full precision.
Json matrix_json(const Pose& p);
Pose pose_from_matrix_json(const Json& j);

Json sequence_to_json(const BendSequence& s);
BendSequence sequence_from_json(const Json& j);

/// Deterministic plan: no wall-clock values.
Json make_plan_document(const Scenario& sc, const SearchResult& res, const std::string& input_digest);

/// Search trace (one record per evaluated sequence), written on failure.
Json make_trace_document(const SearchResult& res);

std::string input_digest(const Scenario& sc);

struct ReplayVerdict {
  bool ok = true;
  int step = -1;
  std::string what;
  int steps_checked = 0;
  int waypoints_checked = 0;
};

ReplayVerdict replay_plan(const Json& doc, double tolerance = 1e-9);

/// ASCII STL of the wire as a tube with `sides` facets around.
std::string wire_stl(const WireState& w, const std::string& name, int sides = 12, double chord_tolerance = 1e-4);

/// Snapshot meshes of a plan: the wire before the first bend and after each
/// bend, named step_00.stl, step_01.stl, ...
std::vector<std::pair<std::string, std::string>> plan_meshes(const Json& doc);

}  // namespace wirebend

namespace wirebend {

/// Bending set of a simplified curve with a provenance header and the
/// simplification deviation.
Json approximation_document(const std::vector<Point3>& curve, double epsilon, double wire_diameter,
                            const MachineModel& machine, double min_bend_angle);

}  // namespace wirebend

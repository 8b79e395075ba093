#ifndef WIREBEND_H
#define WIREBEND_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WB_API __declspec(dllexport)
#else
#define WB_API __attribute__((visibility("default")))
#endif

typedef enum wb_status {
  WB_OK = 0,
  WB_INFEASIBLE = 2,
  WB_TIMEOUT = 3,
  WB_ERR_ARGUMENT = 10,
  WB_ERR_PARSE = 11,
  WB_ERR_IO = 12,
  WB_ERR_GEOMETRY = 13,
  WB_ERR_DIVERGENCE = 14,
  WB_ERR_INTERNAL = 15
} wb_status;

typedef struct wb_scenario wb_scenario;

/* Optional overrides for a loaded project; a field applies when its has_ flag is set. */
typedef struct wb_overrides {
  int has_epsilon;
  double epsilon;
  int has_budget;
  double budget;
  int has_clearance;
  double clearance;
  int has_seed;
  uint64_t seed;
} wb_overrides;

typedef struct wb_benchmark_options {
  int min_bends;
  int max_bends;
  int per_group;
  uint64_t seed;
  double budget;
  double clearance;
  double wire_diameter;
  int plan_motion;
} wb_benchmark_options;

/* Message of the last failed call on this thread, "" if none. */
WB_API const char* wb_last_error(void);
WB_API const char* wb_version(void);
/* Frees strings returned through char** out parameters. */
WB_API void wb_string_free(char* s);

WB_API void wb_benchmark_defaults(wb_benchmark_options* opts);

/* Simplifies a curve file and extracts its bending set. machine_path may be NULL. */
WB_API wb_status wb_approximate(const char* curve_path, double epsilon, double wire_diameter,
                                const char* machine_path, char** document_json);

/* defaults_dir (may be NULL) supplies machine/robot/grasps/world files a project omits. */
WB_API wb_status wb_scenario_load(const char* config_path, const char* defaults_dir,
                                  const wb_overrides* overrides, wb_scenario** out);
WB_API void wb_scenario_free(wb_scenario* s);
WB_API int wb_scenario_bend_count(const wb_scenario* s);

/* Runs the sequence search. Returns WB_OK, WB_INFEASIBLE or WB_TIMEOUT (or an error).
   plan_json is set on success, trace_json always when the search ran. Either may be NULL. */
WB_API wb_status wb_plan(const wb_scenario* s, char** plan_json, char** trace_json);

/* WB_OK when the plan replays, WB_ERR_DIVERGENCE otherwise; verdict_json may be NULL. */
WB_API wb_status wb_replay(const char* plan_json, char** verdict_json);

/* Writes step_NN.stl snapshots of a plan into out_dir. */
WB_API wb_status wb_export_mesh(const char* plan_json, const char* out_dir, int* files_written);

/* Runs the randomized benchmark and writes report.json, times.dat and table.txt into out_dir. */
WB_API wb_status wb_benchmark(const char* defaults_dir, const wb_benchmark_options* opts, const char* out_dir,
                              char** table, void (*progress)(const char* line, void* user), void* user);

#ifdef __cplusplus
}
#endif

#endif

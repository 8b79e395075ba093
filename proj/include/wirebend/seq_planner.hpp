#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wirebend/grasp_motion.hpp"
#include "wirebend/wire_sim.hpp"

namespace wirebend {

struct StepChoice {
  int index = 0;
  BendDirection direction = BendDirection::CW;
  bool use_alpha = true;

  // Token order gives the DFS order: index, then CW < CCW, then alpha < beta.
  int token() const { return index * 4 + (direction == BendDirection::CCW ? 2 : 0) + (use_alpha ? 0 : 1); }
  static StepChoice from_token(int t) {
    return {t / 4, (t & 2) ? BendDirection::CCW : BendDirection::CW, (t & 1) == 0};
  }
  bool operator==(const StepChoice&) const = default;
};

using BendSequence = std::vector<StepChoice>;

std::vector<int> tokens_of(const BendSequence& s);
bool is_valid_sequence(const BendSequence& s, int n);

enum class FailReason {
  None,
  UnreachablePose,
  NoPunchContact,
  NoDieContact,
  PlacementCollision,
  TargetExceedsWorkRange,
  StoppedEarly,
  NoCommonGrasp,
  MotionFail,
};
const char* to_string(FailReason r);

struct StepRecord {
  StepChoice choice;
  WireState posed;  // wire placed in the machine before bending (world frame)
  WireState bent;   // after bending, still in the machine (world frame)
  double achieved_angle = 0.0;
};

struct Evaluation {
  bool success = false;
  int fail_step = -1;
  FailReason reason = FailReason::None;
  std::string detail;
  std::vector<StepRecord> steps;  // executed steps (all of them on success)
  int simulated_steps = 0;        // steps simulated in this call (cache hits excluded)
};

struct PlanningContext {
  BendSet bends;
  MachineModel machine;
  Environment env;
  SimOptions sim;
};

/// Result of one step, independent of how the wire got there.
struct StepOutcome {
  bool ok = false;
  FailReason reason = FailReason::None;
  std::string detail;
  StepRecord record;
  WireState next;  // wire coordinates, pose reset
};

StepOutcome simulate_step(const PlanningContext& ctx, const WireState& wire, const StepChoice& choice);

/// Initial straight wire for a context.
WireState initial_wire(const PlanningContext& ctx);

/// Evaluates a sequence step by step. With a cache, the longest previously
/// evaluated successful prefix is reused.
class PrefixCache;
Evaluation evaluate_sequence(const BendSequence& s, const PlanningContext& ctx, PrefixCache* cache = nullptr);

/// Keeps the step states of the most recently evaluated sequence.
class PrefixCache {
 public:
  std::size_t shared_prefix(const std::vector<int>& tokens) const;
  void store(const std::vector<int>& tokens, std::vector<StepRecord> records, std::vector<WireState> states);
  const std::vector<StepRecord>& records() const { return records_; }
  const std::vector<WireState>& states() const { return states_; }

 private:
  std::vector<int> tokens_;
  std::vector<StepRecord> records_;
  std::vector<WireState> states_;  // states_[k] = wire after k + 1 steps
};

/// Trie of failed prefixes over step tokens. Prefix-closed: once a node is
/// marked failed its subtree is dropped.
class FailedPrefixTree {
 public:
  FailedPrefixTree();
  ~FailedPrefixTree();
  FailedPrefixTree(const FailedPrefixTree&) = delete;
  FailedPrefixTree& operator=(const FailedPrefixTree&) = delete;
  FailedPrefixTree(FailedPrefixTree&&) noexcept;
  FailedPrefixTree& operator=(FailedPrefixTree&&) noexcept;

  void insert(const std::vector<int>& prefix);
  // True when some stored failed prefix is a prefix of `seq` (or equal).
  bool blocks(const std::vector<int>& seq) const;
  bool contains(const std::vector<int>& prefix) const;
  bool root_failed() const;
  std::size_t size() const;
  std::vector<std::vector<int>> prefixes() const;

  struct Node;
  const Node* root_node() const { return root_.get(); }

 private:
  std::unique_ptr<Node> root_;
  std::size_t count_ = 0;
  friend std::optional<BendSequence> next_sequence_dfs(const FailedPrefixTree&, int);
};

void record_failure(FailedPrefixTree& t, const BendSequence& s, int j);

/// Lexicographically smallest full sequence not blocked by the tree.
std::optional<BendSequence> next_sequence_dfs(const FailedPrefixTree& t, int n);

struct MotionVerdict {
  bool ok = true;
  int fail_step = 0;
  FailReason reason = FailReason::None;
  std::string detail;
  ManipulationResult manipulation;
};

using MotionOracle = std::function<MotionVerdict(const Evaluation&)>;

struct SearchOptions {
  double budget = 120.0;  // seconds
  bool keep_trace = true;
  // The wire after a set of bends does not depend on their order, so a
  // geometric step failure is remembered per (bends already made, step) and
  // reused for every other ordering of the same prefix set.
  bool order_memo = true;
};

struct SearchStats {
  long nodes_explored = 0;
  long sequences_evaluated = 0;
  long prunes = 0;
  long motion_calls = 0;
  long memo_hits = 0;
  double wall_time = 0.0;
};

struct TraceRecord {
  std::vector<int> tokens;
  int fail_step = -1;
  FailReason reason = FailReason::None;
  std::string detail;
  double time = 0.0;  // seconds since search start
};

enum class SearchStatus { Found, Infeasible, Timeout };
const char* to_string(SearchStatus s);

struct SearchResult {
  SearchStatus status = SearchStatus::Infeasible;
  BendSequence sequence;
  Evaluation evaluation;
  MotionVerdict motion;
  SearchStats stats;
  std::vector<TraceRecord> trace;
  std::string reason;
};

/// Bends that exceed the work range in both directions make the instance
/// infeasible before any search. Returns their indices.
std::vector<int> statically_infeasible_bends(const PlanningContext& ctx);

SearchResult prune_search(const PlanningContext& ctx, const MotionOracle& motion, const SearchOptions& opts = {});

/// Motion oracle backed by grasp reasoning and joint-space planning.
struct MotionSetup {
  MotionScene scene;
  std::vector<GraspPose> grasps;
  IkOptions ik;
  MotionOptions motion;
};
/// With a cache (one per search), grasp rejections are shared between
/// sequences reaching the same wire pose: same bends made before, same step.
MotionVerdict check_motion(const Evaluation& eval, const PlanningContext& ctx, const MotionSetup& setup,
                           GraspVerdictCache* cache = nullptr);

}  // namespace wirebend

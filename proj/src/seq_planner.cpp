#include "wirebend/seq_planner.hpp"

#include <cmath>
#include <functional>
#include <unordered_set>

#include "wirebend/error.hpp"

namespace wirebend {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Number of full sequences extending a prefix of length `len`.
long completions(int n, int len) {
  long m = 1;
  for (int k = n - len; k > 0; --k) m *= 4L * k;
  return m;
}

}  // namespace

std::vector<int> tokens_of(const BendSequence& s) {
  std::vector<int> out;
  out.reserve(s.size());
  for (const auto& c : s) out.push_back(c.token());
  return out;
}

bool is_valid_sequence(const BendSequence& s, int n) {
  if (static_cast<int>(s.size()) != n) return false;
  std::vector<bool> seen(n, false);
  for (const auto& c : s) {
    if (c.index < 0 || c.index >= n || seen[c.index]) return false;
    seen[c.index] = true;
  }
  return true;
}

const char* to_string(FailReason r) {
  switch (r) {
    case FailReason::None: return "None";
    case FailReason::UnreachablePose: return "UnreachablePose";
    case FailReason::NoPunchContact: return "NoPunchContact";
    case FailReason::NoDieContact: return "NoDieContact";
    case FailReason::PlacementCollision: return "PlacementCollision";
    case FailReason::TargetExceedsWorkRange: return "TargetExceedsWorkRange";
    case FailReason::StoppedEarly: return "StoppedEarly";
    case FailReason::NoCommonGrasp: return "NoCommonGrasp";
    case FailReason::MotionFail: return "MotionFail";
  }
  return "Unknown";
}

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Found: return "Found";
    case SearchStatus::Infeasible: return "Infeasible";
    case SearchStatus::Timeout: return "Timeout";
  }
  return "Unknown";
}

WireState initial_wire(const PlanningContext& ctx) {
  return WireState::straight(ctx.bends.wire.total_length, ctx.bends.wire.diameter);
}

StepOutcome simulate_step(const PlanningContext& ctx, const WireState& wire, const StepChoice& choice) {
  StepOutcome out;
  const auto actions = bend_actions(ctx.bends);
  if (choice.index < 0 || choice.index >= static_cast<int>(actions.size())) {
    throw Error(ErrorCode::InvalidArgument, "bend index out of range");
  }
  const auto& action = actions[choice.index];
  out.record.choice = choice;

  WireState posed;
  try {
    posed = pose_wire_for_bend(wire, action, ctx.machine, choice.use_alpha, choice.direction, ctx.env);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnreachablePose) throw;
    out.reason = FailReason::UnreachablePose;
    out.detail = e.what();
    return out;
  }
  out.record.posed = posed;

  const auto contact = check_contact_feasibility(posed, action, ctx.machine, choice.use_alpha, choice.direction);
  if (contact != ContactVerdict::Feasible) {
    out.reason = contact == ContactVerdict::NoDieContact ? FailReason::NoDieContact : FailReason::NoPunchContact;
    return out;
  }

  const double lag = 2.0 * std::asin(posed.diameter / (2.0 * ctx.machine.punch_orbit_radius()));
  std::string hit;
  if (posed_wire_collides(posed, action, choice.use_alpha, ctx.machine, ctx.env, choice.direction, lag,
                          ctx.sim.clearance, ctx.sim.chord_tolerance, &hit)) {
    out.reason = FailReason::PlacementCollision;
    out.detail = hit;
    return out;
  }

  SimResult sim;
  try {
    sim = simulate_bend(posed, action, choice.direction, choice.use_alpha, ctx.machine, ctx.env, ctx.sim);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TargetExceedsWorkRange) throw;
    out.reason = FailReason::TargetExceedsWorkRange;
    out.detail = e.what();
    return out;
  }
  out.record.bent = sim.wire;
  out.record.achieved_angle = sim.achieved_angle;
  if (sim.stopped_early) {
    out.reason = FailReason::StoppedEarly;
    out.detail = sim.blocking_body;
    return out;
  }
  out.ok = true;
  out.next = sim.wire;
  out.next.pose = Pose::Identity();
  return out;
}

std::size_t PrefixCache::shared_prefix(const std::vector<int>& tokens) const {
  std::size_t k = 0;
  while (k < tokens.size() && k < records_.size() && tokens[k] == tokens_[k]) ++k;
  return k;
}

void PrefixCache::store(const std::vector<int>& tokens, std::vector<StepRecord> records,
                        std::vector<WireState> states) {
  tokens_ = tokens;
  records_ = std::move(records);
  states_ = std::move(states);
}

Evaluation evaluate_sequence(const BendSequence& s, const PlanningContext& ctx, PrefixCache* cache) {
  const int n = static_cast<int>(ctx.bends.size());
  if (!is_valid_sequence(s, n)) throw Error(ErrorCode::InvalidArgument, "sequence is not a permutation of the bends");

  const auto tokens = tokens_of(s);
  Evaluation ev;
  std::vector<WireState> states;
  std::size_t start = 0;
  if (cache) {
    start = cache->shared_prefix(tokens);
    ev.steps.assign(cache->records().begin(), cache->records().begin() + static_cast<long>(start));
    states.assign(cache->states().begin(), cache->states().begin() + static_cast<long>(start));
  }
  WireState wire = start == 0 ? initial_wire(ctx) : states.back();

  ev.success = true;
  for (std::size_t k = start; k < s.size(); ++k) {
    auto step = simulate_step(ctx, wire, s[k]);
    ++ev.simulated_steps;
    if (!step.ok) {
      ev.success = false;
      ev.fail_step = static_cast<int>(k);
      ev.reason = step.reason;
      ev.detail = step.detail;
      break;
    }
    ev.steps.push_back(std::move(step.record));
    states.push_back(step.next);
    wire = std::move(step.next);
  }
  if (cache) cache->store(tokens, ev.steps, std::move(states));
  return ev;
}

struct FailedPrefixTree::Node {
  bool failed = false;
  std::map<int, std::unique_ptr<Node>> children;
};

FailedPrefixTree::FailedPrefixTree() : root_(std::make_unique<Node>()) {}
FailedPrefixTree::~FailedPrefixTree() = default;
FailedPrefixTree::FailedPrefixTree(FailedPrefixTree&&) noexcept = default;
FailedPrefixTree& FailedPrefixTree::operator=(FailedPrefixTree&&) noexcept = default;

namespace {

std::size_t count_failed(const FailedPrefixTree::Node& n) {
  std::size_t c = n.failed ? 1 : 0;
  for (const auto& [tok, child] : n.children) c += count_failed(*child);
  return c;
}

void collect(const FailedPrefixTree::Node& n, std::vector<int>& path, std::vector<std::vector<int>>& out) {
  if (n.failed) {
    out.push_back(path);
    return;
  }
  for (const auto& [tok, child] : n.children) {
    path.push_back(tok);
    collect(*child, path, out);
    path.pop_back();
  }
}

}  // namespace

void FailedPrefixTree::insert(const std::vector<int>& prefix) {
  Node* node = root_.get();
  for (int tok : prefix) {
    if (node->failed) return;
    auto& child = node->children[tok];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  if (node->failed) return;
  count_ -= count_failed(*node);
  node->children.clear();
  node->failed = true;
  ++count_;
}

bool FailedPrefixTree::blocks(const std::vector<int>& seq) const {
  const Node* node = root_.get();
  for (int tok : seq) {
    if (node->failed) return true;
    auto it = node->children.find(tok);
    if (it == node->children.end()) return false;
    node = it->second.get();
  }
  return node->failed;
}

bool FailedPrefixTree::contains(const std::vector<int>& prefix) const {
  const Node* node = root_.get();
  for (int tok : prefix) {
    auto it = node->children.find(tok);
    if (it == node->children.end()) return false;
    node = it->second.get();
  }
  return node->failed;
}

bool FailedPrefixTree::root_failed() const { return root_->failed; }
std::size_t FailedPrefixTree::size() const { return count_; }

std::vector<std::vector<int>> FailedPrefixTree::prefixes() const {
  std::vector<std::vector<int>> out;
  std::vector<int> path;
  collect(*root_, path, out);
  return out;
}

void record_failure(FailedPrefixTree& t, const BendSequence& s, int j) {
  if (j < 0 || j >= static_cast<int>(s.size())) throw Error(ErrorCode::InvalidArgument, "failure step out of range");
  auto tokens = tokens_of(s);
  tokens.resize(static_cast<std::size_t>(j) + 1);
  t.insert(tokens);
}

namespace {

bool dfs(const FailedPrefixTree::Node* node, int n, std::vector<bool>& used, BendSequence& out) {
  if (node && node->failed) return false;
  if (static_cast<int>(out.size()) == n) return true;
  for (int idx = 0; idx < n; ++idx) {
    if (used[idx]) continue;
    for (int sub = 0; sub < 4; ++sub) {
      const int tok = idx * 4 + sub;
      const FailedPrefixTree::Node* child = nullptr;
      if (node) {
        auto it = node->children.find(tok);
        if (it != node->children.end()) child = it->second.get();
      }
      used[idx] = true;
      out.push_back(StepChoice::from_token(tok));
      if (dfs(child, n, used, out)) return true;
      out.pop_back();
      used[idx] = false;
    }
  }
  return false;
}

}  // namespace

std::optional<BendSequence> next_sequence_dfs(const FailedPrefixTree& t, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bend");
  std::vector<bool> used(n, false);
  BendSequence out;
  if (dfs(t.root_.get(), n, used, out)) return out;
  return std::nullopt;
}

std::vector<int> statically_infeasible_bends(const PlanningContext& ctx) {
  std::vector<int> out;
  const double d = ctx.bends.wire.diameter;
  const double cw = max_feasible_angle(d, ctx.machine, BendDirection::CW);
  const double ccw = max_feasible_angle(d, ctx.machine, BendDirection::CCW);
  for (std::size_t k = 0; k < ctx.bends.size(); ++k) {
    const double turn = ctx.bends.candidates[k].turn;
    if (turn > cw + 1e-12 && turn > ccw + 1e-12) out.push_back(static_cast<int>(k));
  }
  return out;
}

namespace {

// Marks ancestors whose every child is failed, so exhausted subtrees collapse.
void collapse_exhausted(FailedPrefixTree& t, const BendSequence& s, int j, int n) {
  auto tokens = tokens_of(s);
  for (int len = j; len >= 0; --len) {
    std::vector<int> prefix(tokens.begin(), tokens.begin() + len);
    std::vector<bool> used(n, false);
    for (int tok : prefix) used[tok / 4] = true;
    bool all = true;
    for (int idx = 0; idx < n && all; ++idx) {
      if (used[idx]) continue;
      for (int sub = 0; sub < 4 && all; ++sub) {
        prefix.push_back(idx * 4 + sub);
        all = t.contains(prefix);
        prefix.pop_back();
      }
    }
    if (!all) return;
    t.insert(prefix);
  }
}

using StepBlocked = std::function<bool(std::uint64_t mask, int token)>;

// DFS that also skips steps rejected by `blocked`; subtrees found empty are
// marked failed in the tree so later calls do not walk them again.
bool dfs_blocked(FailedPrefixTree& t, const FailedPrefixTree::Node* node, int n, std::uint64_t mask,
                 std::vector<int>& prefix, BendSequence& out, const StepBlocked& blocked, long& skipped) {
  if (node && node->failed) return false;
  if (static_cast<int>(out.size()) == n) return true;
  for (int idx = 0; idx < n; ++idx) {
    if (mask & (1ULL << idx)) continue;
    for (int sub = 0; sub < 4; ++sub) {
      const int tok = idx * 4 + sub;
      if (blocked(mask, tok)) {
        ++skipped;
        continue;
      }
      const FailedPrefixTree::Node* child = nullptr;
      if (node) {
        auto it = node->children.find(tok);
        if (it != node->children.end()) child = it->second.get();
      }
      if (child && child->failed) continue;
      prefix.push_back(tok);
      out.push_back(StepChoice::from_token(tok));
      if (dfs_blocked(t, child, n, mask | (1ULL << idx), prefix, out, blocked, skipped)) return true;
      t.insert(prefix);
      out.pop_back();
      prefix.pop_back();
    }
  }
  return false;
}

std::optional<BendSequence> next_sequence_blocked(FailedPrefixTree& t, int n, const StepBlocked& blocked,
                                                  long& skipped) {
  std::vector<int> prefix;
  BendSequence out;
  if (dfs_blocked(t, t.root_node(), n, 0, prefix, out, blocked, skipped)) return out;
  return std::nullopt;
}

}  // namespace

SearchResult prune_search(const PlanningContext& ctx, const MotionOracle& motion, const SearchOptions& opts) {
  const auto t0 = Clock::now();
  SearchResult res;
  const int n = static_cast<int>(ctx.bends.size());
  if (!(opts.budget > 0.0)) throw Error(ErrorCode::InvalidArgument, "budget must be positive");

  if (n == 0) {
    res.status = SearchStatus::Found;
    res.evaluation.success = true;
    res.stats.wall_time = seconds_since(t0);
    return res;
  }
  const auto impossible = statically_infeasible_bends(ctx);
  if (!impossible.empty()) {
    res.status = SearchStatus::Infeasible;
    res.reason = "bend " + std::to_string(impossible.front()) + " exceeds the work range in both directions";
    res.stats.wall_time = seconds_since(t0);
    return res;
  }

  FailedPrefixTree tree;
  PrefixCache cache;
  const bool use_memo = opts.order_memo && n <= 56;
  std::unordered_set<std::uint64_t> memo;
  auto memo_key = [](std::uint64_t mask, const StepChoice& c) {
    return (mask << 8) | static_cast<std::uint64_t>(c.token());
  };
  const StepBlocked blocked = [&](std::uint64_t mask, int tok) {
    return memo.contains((mask << 8) | static_cast<std::uint64_t>(tok));
  };
  while (true) {
    if (seconds_since(t0) > opts.budget) {
      res.status = SearchStatus::Timeout;
      res.reason = "planning budget exhausted";
      break;
    }
    const auto next = use_memo ? next_sequence_blocked(tree, n, blocked, res.stats.memo_hits) : next_sequence_dfs(tree, n);
    if (!next) {
      res.status = SearchStatus::Infeasible;
      res.reason = "every bending sequence fails";
      break;
    }
    const auto& seq = *next;
    auto ev = evaluate_sequence(seq, ctx, &cache);
    ++res.stats.sequences_evaluated;
    res.stats.nodes_explored += ev.simulated_steps;

    TraceRecord rec;
    rec.tokens = tokens_of(seq);
    int fail_step = ev.fail_step;
    FailReason reason = ev.reason;
    std::string detail = ev.detail;
    if (ev.success) {
      ++res.stats.motion_calls;
      auto mv = motion ? motion(ev) : MotionVerdict{};
      if (mv.ok) {
        res.status = SearchStatus::Found;
        res.sequence = seq;
        res.evaluation = std::move(ev);
        res.motion = std::move(mv);
        if (opts.keep_trace) {
          rec.time = seconds_since(t0);
          res.trace.push_back(rec);
        }
        break;
      }
      fail_step = std::clamp(mv.fail_step, 0, n - 1);
      reason = mv.reason;
      detail = mv.detail;
    } else if (use_memo) {
      std::uint64_t mask = 0;
      for (int k = 0; k < fail_step; ++k) mask |= 1ULL << seq[k].index;
      memo.insert(memo_key(mask, seq[fail_step]));
    }
    record_failure(tree, seq, fail_step);
    collapse_exhausted(tree, seq, fail_step, n);
    res.stats.prunes += completions(n, fail_step + 1) - 1;
    if (opts.keep_trace) {
      rec.fail_step = fail_step;
      rec.reason = reason;
      rec.detail = detail;
      rec.time = seconds_since(t0);
      res.trace.push_back(std::move(rec));
    }
  }
  res.stats.wall_time = seconds_since(t0);
  return res;
}

MotionVerdict check_motion(const Evaluation& eval, const PlanningContext& ctx, const MotionSetup& setup,
                           GraspVerdictCache* cache) {
  MotionVerdict out;
  const auto actions = bend_actions(ctx.bends);
  std::vector<HeldPose> before;
  std::vector<WireState> after;
  std::vector<std::uint64_t> keys;
  std::uint64_t mask = 0;
  for (const auto& st : eval.steps) {
    keys.push_back((mask << 8) | static_cast<std::uint64_t>(st.choice.token()));
    mask |= 1ULL << st.choice.index;
    const auto sides = bend_sides(st.posed, actions[st.choice.index], st.choice.use_alpha);
    before.push_back({st.posed, sides.fixed_lo, sides.fixed_hi});
    after.push_back(st.bent);
  }
  if (before.empty()) return out;
  const bool keyed = cache && ctx.bends.size() <= 56;
  out.manipulation = plan_manipulation(before, after, setup.grasps, setup.scene, ctx.machine, setup.ik, setup.motion,
                                       keyed ? cache : nullptr, keyed ? &keys : nullptr);
  switch (out.manipulation.status) {
    case ManipulationStatus::Ok:
      break;
    case ManipulationStatus::NoCommonGrasp:
      out.ok = false;
      out.fail_step = out.manipulation.fail_step;
      out.reason = FailReason::NoCommonGrasp;
      out.detail = out.manipulation.reason;
      break;
    case ManipulationStatus::MotionFail:
      // Transfer failures depend on the whole grasp set, so only the full
      // sequence is known to fail.
      out.ok = false;
      out.fail_step = static_cast<int>(before.size()) - 1;
      out.reason = FailReason::MotionFail;
      out.detail = out.manipulation.reason;
      break;
  }
  return out;
}

}  // namespace wirebend

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "search_oracle.hpp"
#include "wirebend/benchmark.hpp"
#include "wirebend/error.hpp"
#include "wirebend/io.hpp"
#include "wirebend/seq_planner.hpp"

using namespace wirebend;

namespace {

bool has_prefix(const std::vector<int>& seq, const std::vector<int>& p) {
  return p.size() <= seq.size() && std::equal(p.begin(), p.end(), seq.begin());
}

std::vector<std::vector<int>> all_sequences(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::vector<bool> used(n, false);
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (int t = 0; t < 4 * n; ++t) {
      if (used[t / 4]) continue;
      used[t / 4] = true;
      cur.push_back(t);
      rec();
      cur.pop_back();
      used[t / 4] = false;
    }
  };
  rec();
  return out;
}

std::vector<int> random_prefix(std::mt19937_64& rng, int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  const int len = 1 + static_cast<int>(rng() % n);
  std::vector<int> p;
  for (int i = 0; i < len; ++i) p.push_back(idx[i] * 4 + static_cast<int>(rng() % 4));
  return p;
}

Scenario data_scenario(const char* name) {
  return load_scenario(std::string(WIREBEND_DATA_DIR) + "/examples/" + name);
}

Scenario random_scenario(int n, std::uint64_t seed) {
  const std::filesystem::path dir = WIREBEND_DATA_DIR;
  const auto machine = machine_from_json(read_json(dir / "machine.json"));
  std::mt19937_64 rng(seed);
  ProjectConfig cfg;
  cfg.epsilon = 1e-7;
  cfg.seed = seed;
  return build_scenario(cfg, random_bend_polyline(n, rng, machine.bend_radius(cfg.wire.diameter)), machine,
                        robot_from_json(read_json(dir / "robot.json")), world_from_json(read_json(dir / "world.json")),
                        grasps_from_json(read_json(dir / "grasps.json")));
}

const MotionOracle kNoMotion = [](const Evaluation&) { return MotionVerdict{}; };

}  // namespace

TEST_CASE("step tokens round trip") {
  for (int t = 0; t < 40; ++t) CHECK(StepChoice::from_token(t).token() == t);
  CHECK(is_valid_sequence({{0, BendDirection::CW, true}, {1, BendDirection::CCW, false}}, 2));
  CHECK_FALSE(is_valid_sequence({{0, BendDirection::CW, true}, {0, BendDirection::CCW, false}}, 2));
  CHECK_FALSE(is_valid_sequence({{0, BendDirection::CW, true}}, 2));
}

TEST_CASE("failed prefix tree agrees with a flat prefix list") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    FailedPrefixTree tree;
    std::vector<std::vector<int>> flat;
    const auto seqs = all_sequences(n);
    for (int k = 0; k < 6; ++k) {
      const auto p = random_prefix(rng, n);
      tree.insert(p);
      flat.push_back(p);
      for (const auto& s : seqs) {
        const bool expect = std::any_of(flat.begin(), flat.end(), [&](const auto& f) { return has_prefix(s, f); });
        REQUIRE(tree.blocks(s) == expect);
      }
    }
    // Prefix-closed: stored prefixes are exactly the minimal ones.
    std::set<std::vector<int>> minimal;
    for (const auto& f : flat) {
      const bool covered = std::any_of(flat.begin(), flat.end(), [&](const auto& g) {
        return g.size() < f.size() && has_prefix(f, g);
      });
      if (!covered) minimal.insert(f);
    }
    const auto stored = tree.prefixes();
    CHECK(std::set<std::vector<int>>(stored.begin(), stored.end()) == minimal);
    CHECK(tree.size() == minimal.size());
  }
}

TEST_CASE("dfs returns the first unblocked sequence in token order") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const auto seqs = all_sequences(n);
    FailedPrefixTree tree;
    for (int k = 0; k < trial % 7; ++k) tree.insert(random_prefix(rng, n));
    std::optional<std::vector<int>> expect;
    for (const auto& s : seqs) {
      if (!tree.blocks(s)) {
        expect = s;
        break;
      }
    }
    const auto got = next_sequence_dfs(tree, n);
    REQUIRE(got.has_value() == expect.has_value());
    if (got) CHECK(tokens_of(*got) == *expect);
  }
}

TEST_CASE("dfs over a fully failed root is empty") {
  FailedPrefixTree tree;
  for (int t = 0; t < 8; ++t) tree.insert({t});
  CHECK_FALSE(next_sequence_dfs(tree, 2).has_value());
  CHECK_THROWS_AS(next_sequence_dfs(tree, 0), Error);
}

TEST_CASE("record_failure keys the prefix up to the failing step") {
  FailedPrefixTree tree;
  const BendSequence s{{2, BendDirection::CW, true}, {0, BendDirection::CCW, true}, {1, BendDirection::CW, false}};
  record_failure(tree, s, 1);
  CHECK(tree.contains({8, 2}));
  CHECK(tree.blocks({8, 2, 5}));
  CHECK_FALSE(tree.blocks({8, 3, 5}));
  CHECK_THROWS_AS(record_failure(tree, s, 3), Error);
}

TEST_CASE("prune search matches exhaustive search on small random instances") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    const auto sc = random_scenario(n, seed);
    const auto ref = oracle::exhaustive_search(sc.ctx);
    for (bool memo : {false, true}) {
      SearchOptions so;
      so.order_memo = memo;
      const auto res = prune_search(sc.ctx, kNoMotion, so);
      CAPTURE(seed);
      CAPTURE(memo);
      REQUIRE(res.status != SearchStatus::Timeout);
      CHECK((res.status == SearchStatus::Found) == ref.feasible);
      CHECK(static_cast<double>(res.stats.nodes_explored) <= ref.nodes);
      if (ref.feasible) CHECK(tokens_of(res.sequence) == ref.first);
    }
  }
}

TEST_CASE("evaluate_sequence with a prefix cache equals a fresh evaluation") {
  const auto sc = data_scenario("polygon3d.json");
  PrefixCache cache;
  const auto n = static_cast<int>(sc.ctx.bends.size());
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    BendSequence s;
    for (int i : idx) s.push_back(StepChoice::from_token(i * 4 + static_cast<int>(rng() % 4)));
    const auto a = evaluate_sequence(s, sc.ctx, &cache);
    const auto b = evaluate_sequence(s, sc.ctx, nullptr);
    CHECK(a.success == b.success);
    CHECK(a.fail_step == b.fail_step);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
      CHECK(a.steps[k].achieved_angle == b.steps[k].achieved_angle);
      CHECK(a.steps[k].bent.length() == doctest::Approx(b.steps[k].bent.length()).epsilon(1e-12));
    }
  }
}

TEST_CASE("reorder case plans 0, 2, 1 as the exhaustive search does") {
  const auto sc = data_scenario("reorder3.json");
  REQUIRE(sc.ctx.bends.size() == 3);
  GraspVerdictCache cache;
  const auto res = prune_search(sc.ctx, [&](const Evaluation& e) { return check_motion(e, sc.ctx, sc.motion, &cache); });
  REQUIRE(res.status == SearchStatus::Found);
  std::vector<int> order;
  for (const auto& c : res.sequence) order.push_back(c.index);
  CHECK(order == std::vector<int>{0, 2, 1});

  const auto ref = oracle::exhaustive_search(sc.ctx, [&](const BendSequence& s) {
    return check_motion(evaluate_sequence(s, sc.ctx), sc.ctx, sc.motion).ok;
  });
  REQUIRE(ref.feasible);
  CHECK(ref.first == tokens_of(res.sequence));
  CHECK(static_cast<double>(res.stats.nodes_explored) <= ref.nodes);
}

TEST_CASE("bend beyond the work range is infeasible before search") {
  auto sc = data_scenario("polygon2d.json");
  sc.ctx.machine.cw_limit = sc.ctx.machine.ccw_limit = 10.0 * M_PI / 180.0;
  CHECK_FALSE(statically_infeasible_bends(sc.ctx).empty());
  const auto res = prune_search(sc.ctx, kNoMotion);
  CHECK(res.status == SearchStatus::Infeasible);
  CHECK(res.stats.nodes_explored == 0);
}

TEST_CASE("unreachable machine placement fails every prefix") {
  auto sc = data_scenario("polygon2d.json");
  sc.ctx.machine.frame.translation().z() = -0.5;  // under the table
  const auto res = prune_search(sc.ctx, kNoMotion);
  CHECK(res.status == SearchStatus::Infeasible);
  REQUIRE_FALSE(res.trace.empty());
  for (const auto& t : res.trace) CHECK(t.fail_step == 0);
}

TEST_CASE("tiny budget times out") {
  const auto sc = data_scenario("polygon3d.json");
  SearchOptions so;
  so.budget = 1e-9;
  const auto res = prune_search(sc.ctx, kNoMotion, so);
  CHECK(res.status == SearchStatus::Timeout);
  CHECK_THROWS_AS(prune_search(sc.ctx, kNoMotion, SearchOptions{0.0}), Error);
}

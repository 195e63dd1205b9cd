#include <map>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/rng.hpp"
#include "rmued/samplers.hpp"
#include "rmued/serialization.hpp"

using namespace rmued;
using namespace fixtures;

namespace {

// Pearson statistic against a uniform distribution over `counts`.
double chi_square_uniform(const std::map<int, int>& counts, int total) {
  double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double chi = 0.0;
  for (auto [value, n] : counts) chi += (n - expected) * (n - expected) / expected;
  return chi;
}

// Upper 0.1% quantiles of the chi-square distribution.
constexpr double kChi2Df2 = 13.82;
constexpr double kChi2Df4 = 18.47;
constexpr double kChi2Df11 = 31.26;

}  // namespace

TEST_CASE("forced level shapes") {
  Rng rng(1);
  LevelSamplerConfig one;
  one.room_choices = {1};
  one.object_count = ObjectRange{1, 1};
  Level a = sample_level(rng, one);
  CHECK(a.width() == 7);
  CHECK(a.height() == 7);
  CHECK(a.object_count() == 1);
  CHECK(a.door_positions().empty());

  LevelSamplerConfig six;
  six.room_choices = {6};
  Level b = sample_level(rng, six);
  CHECK(b.width() == 19);
  CHECK(b.height() == 13);
  CHECK(b.door_positions().size() == 7);
}

TEST_CASE("four-room object counts are uniform over 4..15") {
  Rng rng(2);
  LevelSamplerConfig cfg;
  cfg.room_choices = {4};
  std::map<int, int> counts;
  for (int v = 4; v <= 15; ++v) counts[v] = 0;
  for (int i = 0; i < 10000; ++i) {
    int n = sample_level(rng, cfg).object_count();
    REQUIRE(counts.count(n) == 1);
    ++counts[n];
  }
  CHECK(chi_square_uniform(counts, 10000) < kChi2Df11);
}

TEST_CASE("sequential machines") {
  Rng rng(3);
  SequentialRmConfig two{2, 2, RewardKind::sparse};
  PropSet allowed = props({"front_ball", "front_square_red"});
  RewardMachine rm = sample_sequential_rm(rng, two, &allowed);
  CHECK(rm.num_states == 3);
  CHECK(rm.edges.size() == 2);
  for (const auto& e : rm.edges) CHECK(allowed.test(to_index(e.formula.positive)));
  CHECK(rm.find_edge(1, 2)->reward == 1.0);

  SequentialRmConfig single{1, 1, RewardKind::sparse};
  CHECK(sample_sequential_rm(rng, single).num_states == 2);

  std::map<int, int> lengths;
  for (int i = 0; i < 10000; ++i) {
    RewardMachine m = sample_sequential_rm(rng, SequentialRmConfig{});
    auto metrics = path_metrics(m);
    REQUIRE(metrics.num_paths == 1);
    REQUIRE(metrics.avg_path_length == static_cast<double>(m.num_states - 1));
    ++lengths[m.num_states - 1];
  }
  CHECK(lengths.size() == 5);
  CHECK(chi_square_uniform(lengths, 10000) < kChi2Df4);
}

TEST_CASE("hierarchy structures") {
  Rng rng(4);
  auto single = sample_hierarchy_structure(rng, 1, {});
  CHECK(single.num_nodes == 1);
  CHECK(single.edges.empty());

  auto three = sample_hierarchy_structure(rng, 3, {});
  CHECK(three.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});

  CHECK(ordered_partitions(2) == std::vector<std::vector<int>>{{2}, {1, 1}});
  int root_two_children = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto t = sample_hierarchy_structure(rng, 5, {});
    int root_children = 0;
    for (auto [parent, child] : t.edges) root_children += parent == 0 ? 1 : 0;
    root_two_children += root_children == 2 ? 1 : 0;
  }
  // Binomial(10000, 0.5): 0.03 is six standard deviations.
  CHECK(std::abs(root_two_children / double(n) - 0.5) < 0.03);
}

TEST_CASE("random-walk structures") {
  Rng rng(5);
  RandomWalkConfig seq;
  seq.structure = RmStructure::sequential;
  seq.num_states = 3;
  RewardMachine chain_rm = sample_rw_structure(rng, seq);
  std::set<std::pair<int, int>> edges;
  for (const auto& e : chain_rm.edges) edges.insert({e.source, e.target});
  CHECK(edges == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});

  RandomWalkConfig dag;
  for (int i = 0; i < 1000; ++i) {
    RewardMachine rm = sample_rw_structure(rng, dag);
    REQUIRE(is_acyclic(rm));
    auto paths = path_metrics(rm).num_paths;
    CHECK((paths == 1 || paths == 2));
  }
}

TEST_CASE("proposition labeling masks") {
  Rng rng(6);
  const auto& a = Alphabet::instance();
  TaskSamplerConfig cfg;
  cfg.structure = RmStructure::dag;
  for (int i = 0; i < 500; ++i) {
    RewardMachine rm = sample_task(rng, cfg, all_propositions());
    for (const auto& in : rm.edges) {
      for (const RmEdge* out : rm.outgoing(in.target))
        CHECK_FALSE(a.implies(in.formula.positive, out->formula.positive));
    }
    for (RmState u = 0; u < rm.num_states; ++u) {
      auto out = rm.outgoing(u);
      for (const RmEdge* x : out)
        for (const RmEdge* y : out)
          if (x != y) CHECK_FALSE(a.implies(x->formula.positive, y->formula.positive));
    }
  }
}

TEST_CASE("a flat hierarchy carries no calls") {
  Rng rng(7);
  RandomWalkConfig cfg;
  HierarchySpec spec = sample_rw_hierarchy(rng, cfg, all_propositions());
  REQUIRE(spec.num_nodes == 1);
  for (const auto& label : spec.call_labels[0]) CHECK_FALSE(label);
  CHECK(spec.flatten() == spec.machines[0]);
}

TEST_CASE("level-conditioned tasks use only what the level holds") {
  Level level(1);
  level.agent = {1, 1};
  level.set_object({3, 3}, obj(ObjectKind::ball, Color::blue));
  CHECK(level_allowed_propositions(level) ==
        props({"front_ball", "front_ball_blue", "carrying_ball", "carrying_ball_blue"}));

  Rng rng(8);
  LevelSamplerConfig lc;
  lc.room_choices = {1};
  lc.object_count = ObjectRange{1, 1};
  for (int i = 0; i < 200; ++i) {
    Problem p = sample_problem(rng, ProblemMode::level_conditioned, lc, TaskSamplerConfig{});
    PropSet allowed = level_allowed_propositions(p.level);
    for (const auto& e : p.rm.edges) CHECK(allowed.test(to_index(e.formula.positive)));
  }
}

TEST_CASE("task-conditioned levels host the task's objects") {
  Rng rng(9);
  RewardMachine rm = chain({"next_ball_blue_square"});
  for (int i = 0; i < 50; ++i) {
    Level level = sample_level_for_task(rng, LevelSamplerConfig{}, rm);
    bool blue_ball = false;
    bool square = false;
    for (Pos p : level.non_door_positions()) {
      auto o = *level.object_at(p);
      blue_ball |= o.kind == ObjectKind::ball && o.color == Color::blue;
      square |= o.kind == ObjectKind::square;
    }
    CHECK(blue_ball);
    CHECK(square);
  }
}

TEST_CASE("independent mode draws the task without looking at the level") {
  LevelSamplerConfig small;
  small.room_choices = {1};
  LevelSamplerConfig large;
  large.room_choices = {6};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r1(seed);
    Rng r2(seed);
    Problem a = sample_problem(r1, ProblemMode::independent, small, TaskSamplerConfig{});
    Problem b = sample_problem(r2, ProblemMode::independent, large, TaskSamplerConfig{});
    CHECK(a.rm == b.rm);
  }
}

TEST_CASE("property: sampled problems are valid and reproducible") {
  TaskSamplerConfig dag;
  dag.structure = RmStructure::dag;
  for (int i = 0; i < 10000; ++i) {
    auto mode = static_cast<ProblemMode>(i % 3);
    const TaskSamplerConfig& task = i % 2 ? dag : TaskSamplerConfig{};
    Rng r1 = Rng::stream(10, "fuzz", static_cast<std::uint64_t>(i));
    Rng r2 = Rng::stream(10, "fuzz", static_cast<std::uint64_t>(i));
    Problem p = sample_problem(r1, mode, LevelSamplerConfig{}, task);
    REQUIRE(check_determinism(p.rm));
    REQUIRE(problem_problem(p).empty());
    if (i % 50 == 0) {
      Problem q = sample_problem(r2, mode, LevelSamplerConfig{}, task);
      CHECK(dump_line(to_json(p)) == dump_line(to_json(q)));
    }
  }
}

TEST_CASE("non-door objects draw kinds uniformly") {
  Rng rng(12);
  std::map<int, int> kinds;
  for (int i = 0; i < 9000; ++i) ++kinds[static_cast<int>(random_non_door(rng).kind)];
  CHECK(kinds.size() == 3);
  CHECK(kinds.count(static_cast<int>(ObjectKind::door)) == 0);
  CHECK(chi_square_uniform(kinds, 9000) < kChi2Df2);
}

#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/rng.hpp"
#include "rmued/samplers.hpp"

using namespace rmued;
using namespace fixtures;

TEST_CASE("the go-to-ball-then-red-square machine") {
  RewardMachine rm = fig1_rm();
  CHECK(check_determinism(rm));
  CHECK(structural_problem(rm).empty());
  CHECK(rm.find_edge(0, 1)->reward == 0.0);
  CHECK(rm.find_edge(1, 2)->reward == 1.0);

  PropSet example = props({"front_ball", "front_ball_blue", "next_square_key",
                           "next_square_purple_key_green", "next_square_key_green",
                           "next_square_purple_key"});
  CHECK(rm_step(rm, 0, example) == StepResult{1, 0.0});
  CHECK(rm_step(rm, 1, props({"front_square_red"})) == StepResult{2, 1.0});
  CHECK(rm_step(rm, 0, PropSet{}) == StepResult{0, 0.0});
  CHECK(rm_step(rm, 1, example) == StepResult{1, 0.0});
}

TEST_CASE("reward variants") {
  CHECK(assign_rewards(chain({"front_ball"}), RewardKind::stepwise).edges[0].reward == 1.0);
  CHECK(assign_rewards(chain({"front_ball"}), RewardKind::distance_shaped).edges[0].reward == 1.0);
  auto shaped = assign_rewards(chain({"front_ball", "front_key"}), RewardKind::distance_shaped);
  CHECK(shaped.edges[0].reward == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shaped.edges[1].reward == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("determinism check") {
  RewardMachine rm;
  rm.num_states = 3;
  rm.accepting = 2;
  rm.edges.push_back({0, 1, Formula{prop("front_ball"), {}}, 0.0});
  rm.edges.push_back({0, 2, Formula{prop("front_ball"), {}}, 1.0});
  CHECK_FALSE(check_determinism(rm));

  rm.edges[1].formula.positive = prop("front_key");
  CHECK_FALSE(check_determinism(rm));  // siblings lack cross-negations
  recompute_negations(rm);
  CHECK(check_determinism(rm));
}

TEST_CASE("implication drives formula satisfaction") {
  Formula f{prop("front_ball"), {prop("front_ball_red")}};
  CHECK(f.satisfied_by(props({"front_ball_blue", "front_ball"})));
  CHECK_FALSE(f.satisfied_by(props({"front_ball_red", "front_ball"})));
  CHECK_FALSE(f.satisfied_by(props({"carrying_ball"})));
}

TEST_CASE("path enumeration and metrics") {
  RewardMachine diamond;
  diamond.num_states = 4;
  diamond.accepting = 3;
  add_edge(diamond, 0, 1, "front_ball");
  add_edge(diamond, 0, 2, "front_key");
  add_edge(diamond, 1, 3, "front_square");
  add_edge(diamond, 2, 3, "front_square");
  CHECK(enumerate_paths(diamond).size() == 2);
  auto m = path_metrics(diamond);
  CHECK(m.num_paths == 2);
  CHECK(m.avg_path_length == doctest::Approx(2.0));

  auto c = chain({"front_ball", "front_key", "front_square", "carrying_key", "carrying_ball"});
  auto cm = path_metrics(c);
  CHECK(cm.num_paths == 1);
  CHECK(cm.avg_path_length == doctest::Approx(5.0));

  // Two binary choices in series: brute force gives 4 paths of length 4.
  RewardMachine dd;
  dd.num_states = 7;
  dd.accepting = 6;
  add_edge(dd, 0, 1, "front_ball");
  add_edge(dd, 0, 2, "front_key");
  add_edge(dd, 1, 3, "front_square");
  add_edge(dd, 2, 3, "front_square");
  add_edge(dd, 3, 4, "carrying_ball");
  add_edge(dd, 3, 5, "carrying_key");
  add_edge(dd, 4, 6, "front_door");
  add_edge(dd, 5, 6, "front_door");
  auto dm = path_metrics(dd);
  CHECK(dm.num_paths == 4);
  CHECK(dm.avg_path_length == doctest::Approx(4.0));
  CHECK(enumerate_paths(dd).size() == 4);
}

TEST_CASE("simple paths skip cycles") {
  RewardMachine rm;
  rm.num_states = 4;
  rm.accepting = 3;
  add_edge(rm, 0, 1, "front_ball");
  add_edge(rm, 1, 2, "front_key");
  add_edge(rm, 2, 1, "front_square");
  add_edge(rm, 2, 3, "carrying_key");
  add_edge(rm, 1, 3, "carrying_ball");
  CHECK_FALSE(is_acyclic(rm));
  auto paths = enumerate_paths(rm);
  CHECK(paths.size() == 2);
  for (const auto& path : paths) {
    std::set<RmState> seen{path.front().source};
    for (const auto& e : path) CHECK(seen.insert(e.target).second);
  }
}

TEST_CASE("policy graph export") {
  auto g = export_policy_graph(fig1_rm());
  CHECK(g.num_nodes == 3);
  std::set<std::pair<int, int>> edges(g.reversed_edges.begin(), g.reversed_edges.end());
  CHECK(edges == std::set<std::pair<int, int>>{{1, 0}, {2, 1}});

  RewardMachine two;
  two.num_states = 3;
  two.accepting = 2;
  add_edge(two, 0, 1, "front_ball");
  add_edge(two, 0, 2, "front_square_red");
  auto g2 = export_policy_graph(two, 0);
  REQUIRE(g2.edge_features.size() == 2);
  for (const auto& features : g2.edge_features) {
    REQUIRE(features.size() == 2);
    CHECK(features[0].sign == 1);
    CHECK(features[1].sign == -1);
  }
  CHECK(g2.current_state == 0);
}

TEST_CASE("property: sampled machines fire at most one edge per label") {
  Rng rng(3);
  const auto& a = Alphabet::instance();
  TaskSamplerConfig cfg;
  cfg.structure = RmStructure::dag;
  for (int k = 0; k < 200; ++k) {
    RewardMachine rm = sample_task(rng, cfg, all_propositions());
    REQUIRE(check_determinism(rm));
    for (int trial = 0; trial < 20; ++trial) {
      PropSet label;
      for (int i = 0; i < 4; ++i) label.set(rng.uniform_index(a.size()));
      label = a.close(label);
      for (RmState u = 0; u < rm.num_states; ++u) {
        int fired = 0;
        for (const RmEdge* e : rm.outgoing(u)) fired += e->formula.satisfied_by(label) ? 1 : 0;
        CHECK(fired <= 1);
      }
    }
    if (is_acyclic(rm))
      CHECK(enumerate_paths(rm).size() == static_cast<std::size_t>(path_metrics(rm).num_paths));
    // Re-reversing the exported edges recovers the edge set.
    auto g = export_policy_graph(rm);
    std::set<std::pair<int, int>> original;
    for (const auto& e : rm.edges) original.insert({e.source, e.target});
    std::set<std::pair<int, int>> back;
    for (auto [t, s] : g.reversed_edges) back.insert({s, t});
    CHECK(back == original);
  }
}

TEST_CASE("sparse episodes collect at most reward 1") {
  Rng rng(5);
  TaskSamplerConfig cfg;
  const auto& a = Alphabet::instance();
  for (int k = 0; k < 100; ++k) {
    RewardMachine rm = sample_task(rng, cfg, all_propositions());
    RmState u = rm.initial;
    double total = 0.0;
    for (int t = 0; t < 200 && u != rm.accepting; ++t) {
      PropSet label;
      label.set(rng.uniform_index(a.size()));
      auto step = rm_step(rm, u, a.close(label));
      total += step.reward;
      u = step.state;
    }
    CHECK((total == 0.0 || total == 1.0));
  }
}

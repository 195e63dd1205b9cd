#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/mutations.hpp"
#include "rmued/rng.hpp"
#include "rmued/samplers.hpp"

using namespace rmued;
using namespace fixtures;

TEST_CASE("edit kind names round-trip") {
  for (int k = 0; k < kNumEditKinds; ++k) {
    auto kind = static_cast<EditKind>(k);
    CHECK(parse_edit_kind(to_string(kind)) == kind);
  }
  CHECK(to_string(EditKind::add_rooms) == "AddRooms");
  CHECK(is_hindsight(EditKind::extract_preceding));
  CHECK_FALSE(is_hindsight(EditKind::add_state));
  CHECK(is_level_edit(EditKind::move_agent));
  CHECK_FALSE(is_level_edit(EditKind::switch_proposition));
}

TEST_CASE("room edits walk the size ladder") {
  CHECK(rooms_after_add(1) == 2);
  CHECK(rooms_after_add(2) == 4);
  CHECK(rooms_after_add(4) == 6);
  CHECK(rooms_after_remove(6) == 4);
  CHECK(rooms_after_remove(4) == 2);
  CHECK(rooms_after_remove(2) == 1);

  const std::vector<std::pair<int, int>> dims{{7, 7}, {7, 13}, {13, 13}, {13, 19}};
  Rng rng(30);
  Problem p = fig1_problem();
  CHECK_FALSE(edit_applicable(p, EditKind::remove_rooms));
  for (std::size_t i = 1; i < dims.size(); ++i) {
    p = apply_edit(p, EditKind::add_rooms, rng);
    CHECK(std::pair{p.level.height(), p.level.width()} == dims[i]);
    CHECK(problem_problem(p).empty());
  }
  CHECK_FALSE(edit_applicable(p, EditKind::add_rooms));
  CHECK_THROWS_AS(apply_edit(p, EditKind::add_rooms, rng), EditError);
  for (std::size_t i = dims.size() - 1; i > 0; --i) {
    p = apply_edit(p, EditKind::remove_rooms, rng);
    CHECK(std::pair{p.level.height(), p.level.width()} == dims[i - 1]);
    CHECK(problem_problem(p).empty());
  }
}

TEST_CASE("hindsight edits cut the machine at the reached state") {
  Problem p{chain({"front_ball", "front_key", "front_square"}), fig1_level()};
  Rng rng(31);
  CHECK_FALSE(edit_applicable(p, EditKind::extract_preceding));

  RolloutContext ctx{1, fig1_level()};
  ctx.final_level.agent = {2, 2};
  Problem pre = apply_edit(p, EditKind::extract_preceding, rng, &ctx);
  CHECK(pre.rm.num_states == 2);
  CHECK(pre.rm.edges.size() == 1);
  CHECK(pre.rm.edges[0].formula.positive == prop("front_ball"));
  CHECK(pre.level == p.level);

  Problem suc = apply_edit(p, EditKind::extract_succeeding, rng, &ctx);
  CHECK(suc.rm.num_states == 3);
  CHECK(suc.rm.edges[0].formula.positive == prop("front_key"));
  CHECK(suc.level == ctx.final_level);

  RolloutContext at_start{0, fig1_level()};
  CHECK_FALSE(edit_applicable(p, EditKind::extract_succeeding, &at_start));
}

TEST_CASE("state edits respect the size cap") {
  MutationConfig cfg;
  cfg.max_states = 3;
  Problem p{chain({"front_ball", "front_key"}), fig1_level()};
  CHECK_FALSE(edit_applicable(p, EditKind::add_state, nullptr, cfg));
  Problem q{chain({"front_ball"}), fig1_level()};
  CHECK_FALSE(edit_applicable(q, EditKind::remove_state));
}

TEST_CASE("property: random mutation chains keep every invariant") {
  MutationConfig cfg;
  std::set<int> kinds_seen;
  for (std::uint64_t chain_id = 0; chain_id < 40; ++chain_id) {
    Rng rng = Rng::stream(32, "chain", chain_id);
    Problem p = sample_problem(rng, ProblemMode::level_conditioned, LevelSamplerConfig{},
                               TaskSamplerConfig{});
    for (int i = 0; i < 60; ++i) {
      RolloutContext ctx{static_cast<RmState>(rng.uniform_index(p.rm.num_states)), p.level};
      Mutation m = mutate(p, rng, i % 3 == 0 ? &ctx : nullptr, cfg);
      REQUIRE(problem_problem(m.problem).empty());
      REQUIRE(check_determinism(m.problem.rm));
      REQUIRE(m.problem.rm.num_states <= cfg.max_states);
      REQUIRE(static_cast<int>(m.edits.size()) <= cfg.max_edits);
      auto range = object_range(m.problem.level.rooms());
      REQUIRE(m.problem.level.object_count() >= range.min);
      REQUIRE(m.problem.level.object_count() <= range.max);
      for (std::size_t e = 1; e < m.edits.size(); ++e) REQUIRE_FALSE(is_hindsight(m.edits[e].kind));
      for (const Edit& e : m.edits) kinds_seen.insert(static_cast<int>(e.kind));
      CHECK(replay_edits(p, m.edits, i % 3 == 0 ? &ctx : nullptr, cfg) == m.problem);
      p = m.problem;
    }
  }
  CHECK(kinds_seen.size() == static_cast<std::size_t>(kNumEditKinds));
}

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/curriculum.hpp"
#include "rmued/serialization.hpp"

using namespace rmued;
using namespace fixtures;

namespace {

BufferEntry entry(double score, std::int64_t insert_step = 0, std::int64_t last_sampled = 0) {
  BufferEntry e;
  e.problem = fig1_problem();
  e.score = score;
  e.insert_step = insert_step;
  e.last_sampled_step = last_sampled;
  return e;
}

CurriculumConfig small_config(Algorithm algorithm) {
  CurriculumConfig cfg;
  cfg.algorithm = algorithm;
  cfg.buffer_capacity = 16;
  cfg.episodes_per_step = 8;
  cfg.horizon = 64;
  cfg.generator.level.room_choices = {1};
  cfg.generator.task.sequential = SequentialRmConfig{1, 2, RewardKind::sparse};
  if (algorithm == Algorithm::accel0) {
    cfg.generator.level.object_count = ObjectRange{1, 1};
    cfg.generator.task.sequential = SequentialRmConfig{1, 1, RewardKind::sparse};
  }
  return cfg;
}

StudentFactory planner() { return student_factory(StudentSpec{}); }

}  // namespace

TEST_CASE("algorithm and score names") {
  for (auto a : {Algorithm::dr, Algorithm::plr_robust, Algorithm::accel, Algorithm::accel0})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK(to_string(Algorithm::plr_robust) == "PLR_robust");
  CHECK(parse_score_fn("MaxMC") == ScoreFn::maxmc);
  CHECK(parse_score_fn("PVL") == ScoreFn::pvl);
  CHECK_FALSE(parse_algorithm("PLR"));
}

TEST_CASE("default replay rates") {
  CurriculumConfig cfg;
  cfg.algorithm = Algorithm::plr_robust;
  CHECK(effective_replay_rate(cfg) == 0.5);
  cfg.algorithm = Algorithm::accel;
  CHECK(effective_replay_rate(cfg) == 0.9);
  cfg.algorithm = Algorithm::accel0;
  CHECK(effective_replay_rate(cfg) == 0.99);
  cfg.replay_rate = 0.3;
  CHECK(effective_replay_rate(cfg) == 0.3);
  cfg.temperature = 0.0;
  CHECK_THROWS_AS(check_config(cfg), ConfigError);
}

TEST_CASE("MaxMC averages the gap to the best return") {
  RolloutSummary s;
  s.values = {0.5, 0.25};
  s.rewards = {0.0, 0.0};
  CHECK(std::abs(score_maxmc(s, 1.0) - 0.625) < 1e-9);
  CHECK(score_maxmc(s, 0.0) == 0.0);
  CHECK(score_maxmc(RolloutSummary{}, 1.0) == 0.0);
}

TEST_CASE("PVL matches a hand-expanded GAE") {
  RolloutSummary s;
  s.values = {0.2, 0.6, 0.9};
  s.rewards = {0.0, 0.0, 1.0};
  const double g = 0.99;
  const double l = 0.9;
  double d2 = 1.0 - 0.9;
  double d1 = g * 0.9 - 0.6;
  double d0 = g * 0.6 - 0.2;
  double a2 = d2;
  double a1 = d1 + g * l * a2;
  double a0 = d0 + g * l * a1;
  double expected = (std::max(a0, 0.0) + std::max(a1, 0.0) + std::max(a2, 0.0)) / 3.0;
  CHECK(std::abs(score_pvl(s, g, l) - expected) < 1e-12);
}

TEST_CASE("rank replay distribution") {
  CurriculumConfig cfg;
  cfg.staleness_coef = 0.0;
  Buffer b;
  b.entries = {entry(0.1), entry(0.9), entry(0.5)};
  auto p = replay_distribution(b, cfg, 0);
  CHECK(std::abs(p[1] - 6.0 / 11.0) < 1e-9);
  CHECK(std::abs(p[2] - 3.0 / 11.0) < 1e-9);
  CHECK(std::abs(p[0] - 2.0 / 11.0) < 1e-9);

  // Ties rank the older insert first.
  Buffer tied;
  tied.entries = {entry(0.5, 3), entry(0.5, 1)};
  auto q = replay_distribution(tied, cfg, 0);
  CHECK(std::abs(q[1] - 2.0 / 3.0) < 1e-12);

  cfg.staleness_coef = 1.0;
  Buffer stale;
  stale.entries = {entry(0.1, 0, 8), entry(0.9, 0, 4)};
  auto r = replay_distribution(stale, cfg, 10);
  CHECK(std::abs(r[0] - 2.0 / 8.0) < 1e-12);
  CHECK(std::abs(r[1] - 6.0 / 8.0) < 1e-12);
  auto uniform = replay_distribution(Buffer{{entry(0.1, 0, 4), entry(0.2, 0, 4)}, 0}, cfg, 4);
  CHECK(uniform[0] == doctest::Approx(0.5));
}

TEST_CASE("property: replay distributions are normalized") {
  Rng rng(50);
  CurriculumConfig cfg;
  for (int t = 0; t < 200; ++t) {
    Buffer b;
    int n = rng.uniform_int(1, 30);
    for (int i = 0; i < n; ++i)
      b.entries.push_back(entry(rng.uniform01(), rng.uniform_int(0, 5), rng.uniform_int(0, 9)));
    cfg.temperature = 0.1 + 2.0 * rng.uniform01();
    cfg.staleness_coef = rng.uniform01();
    auto p = replay_distribution(b, cfg, 10);
    double total = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("insertion at capacity evicts the weakest entry only when beaten") {
  CurriculumConfig cfg;
  cfg.buffer_capacity = 2;
  Buffer b;
  CHECK(buffer_insert(b, entry(0.4), cfg) == InsertOutcome::inserted);
  CHECK(buffer_insert(b, entry(0.2), cfg) == InsertOutcome::inserted);
  CHECK(buffer_insert(b, entry(0.2), cfg) == InsertOutcome::rejected);
  CHECK(buffer_insert(b, entry(0.3), cfg) == InsertOutcome::inserted_with_eviction);
  CHECK(b.entries.size() == 2);
  CHECK(b.entries[1].score == 0.3);
  CHECK(b.entries[1].seq == 3);
  CHECK(b.next_seq == 4);
}

TEST_CASE("buffer statistics") {
  CurriculumConfig cfg;
  cfg.staleness_coef = 0.0;
  CHECK_THROWS_AS(buffer_stats(Buffer{}, cfg, 0), std::invalid_argument);
  Buffer b;
  b.entries = {entry(0.9), entry(0.1)};
  b.entries[0].solvable_hint = true;
  b.entries[0].lineage.resize(3);
  b.entries[1].solvable_hint = false;
  auto s = buffer_stats(b, cfg, 0);
  CHECK(s.size == 2);
  CHECK(s.solvable_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(s.mean_edits == doctest::Approx(2.0));
  CHECK(s.mean_states == doctest::Approx(3.0));
  CHECK(s.mean_num_paths == doctest::Approx(1.0));
}

TEST_CASE("DR trains on fresh problems and keeps no buffer") {
  CurriculumState state;
  state.seed = 3;
  auto cfg = small_config(Algorithm::dr);
  StepReport r = ued_step(state, planner(), cfg);
  CHECK(r.generated == 8);
  CHECK(r.replayed == 0);
  CHECK(state.buffer.entries.empty());
  CHECK(state.step == 1);
  CHECK(r.training_batch[0] == generate_problem(cfg, 3, 0, 0));
}

TEST_CASE("PLR fills its buffer and replays from it") {
  CurriculumState state;
  state.seed = 4;
  auto cfg = small_config(Algorithm::plr_robust);
  int replayed = 0;
  for (int i = 0; i < 6; ++i) {
    StepReport r = ued_step(state, planner(), cfg);
    CHECK(r.replayed + r.generated == 8);
    CHECK(r.event["step"] == i);
    CHECK(r.event.contains("buffer_stats"));
    replayed += r.replayed;
  }
  CHECK(replayed > 0);
  CHECK(state.buffer.entries.size() == 16);
}

TEST_CASE("ACCEL0 mutates replayed problems and grows lineages") {
  CurriculumState state;
  state.seed = 5;
  auto cfg = small_config(Algorithm::accel0);
  cfg.buffer_capacity = 200;
  for (int i = 0; i < 10; ++i) ued_step(state, planner(), cfg);
  std::size_t longest = 0;
  for (const auto& e : state.buffer.entries) {
    longest = std::max(longest, e.lineage.size());
    if (!e.lineage.empty()) {
      CHECK(e.parent_edits >= cfg.mutation.min_edits);
      CHECK(e.parent_edits <= cfg.mutation.max_edits);
    }
    CHECK(problem_problem(e.problem).empty());
  }
  CHECK(longest > static_cast<std::size_t>(cfg.mutation.max_edits));
}

TEST_CASE("steps are deterministic and the state round-trips") {
  auto cfg = small_config(Algorithm::accel);
  CurriculumState a;
  a.seed = 6;
  CurriculumState b = a;
  for (int i = 0; i < 3; ++i) ued_step(a, planner(), cfg);
  for (int i = 0; i < 3; ++i) ued_step(b, planner(), cfg, 3);
  CHECK(dump_line(to_json(a)) == dump_line(to_json(b)));

  CurriculumState restored = curriculum_state_from_json(to_json(a));
  CHECK(dump_line(to_json(restored)) == dump_line(to_json(a)));
  StepReport x = ued_step(a, planner(), cfg);
  StepReport y = ued_step(restored, planner(), cfg);
  CHECK(dump_line(x.event) == dump_line(y.event));
}

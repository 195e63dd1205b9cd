#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/rng.hpp"
#include "rmued/samplers.hpp"
#include "rmued/solvability.hpp"
#include "rmued/students.hpp"

using namespace rmued;
using namespace fixtures;

TEST_CASE("scripted actions reach the red square") {
  Problem p = fig1_problem();
  RolloutSummary s = replay_actions(p, fig1_script());
  CHECK(s.solved);
  CHECK(s.undiscounted_return == 1.0);
  CHECK(s.initial_reward == 0.0);
  CHECK(s.length == static_cast<int>(fig1_script().size()));
  CHECK(s.final_rm_state == 2);
  CHECK(s.rewards.back() == 1.0);
}

TEST_CASE("the initial label fires before the first action") {
  Problem p{chain({"front_ball"}), fig1_level()};
  RolloutSummary s = replay_actions(p, {});
  CHECK(s.solved);
  CHECK(s.initial_reward == 1.0);
  CHECK(s.length == 0);
}

TEST_CASE("horizon stops an episode") {
  Problem p = fig1_problem();
  RandomStudent student;
  RolloutOptions opt;
  opt.horizon = 3;
  Trajectory t = rollout(p, student, 1, opt);
  CHECK(t.summary.length <= 3);
  CHECK(t.actions.size() == static_cast<std::size_t>(t.summary.length));
}

TEST_CASE("the planner solves the two-step example") {
  Problem p = fig1_problem();
  PlannerStudent planner;
  auto plan = planner.plan(p.level, p.rm, 0);
  REQUIRE(plan);
  CHECK(replay_actions(p, *plan).solved);

  RolloutOptions opt;
  opt.record_steps = true;
  Trajectory t = rollout(p, planner, 7, opt);
  CHECK(t.summary.solved);
  CHECK(t.summary.undiscounted_return == 1.0);
  REQUIRE(t.steps.size() == static_cast<std::size_t>(t.summary.length));
  // Plan values are gamma^(remaining - 1), so the last step is valued 1.
  CHECK(t.summary.values.back() == doctest::Approx(1.0));
  for (std::size_t i = 0; i + 1 < t.summary.values.size(); ++i)
    CHECK(t.summary.values[i] == doctest::Approx(t.summary.values[i + 1] * 0.99));
}

TEST_CASE("the planner opens a locked door with a key") {
  Level level = two_rooms(obj(ObjectKind::door, Color::yellow, DoorState::locked));
  level.set_object({2, 1}, obj(ObjectKind::key, Color::yellow));
  level.set_object({9, 3}, obj(ObjectKind::ball, Color::red));
  Problem p{chain({"front_ball_red"}), level};
  PlannerStudent planner;
  CHECK(rollout(p, planner, 3).summary.solved);
}

TEST_CASE("the planner gives value 0 on an unsolvable task") {
  Problem p{chain({"front_key_red"}), fig1_level()};
  PlannerStudent planner;
  CHECK_FALSE(planner.plan(p.level, p.rm, 0));
  Trajectory t = rollout(p, planner, 3);
  CHECK_FALSE(t.summary.solved);
  for (double v : t.summary.values) CHECK(v == 0.0);
}

TEST_CASE("rollouts are reproducible from the seed") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = Rng::stream(40, "students", i);
    Problem p = sample_problem(rng, ProblemMode::level_conditioned, LevelSamplerConfig{},
                               TaskSamplerConfig{});
    RandomStudent a;
    RandomStudent b;
    CHECK(rollout(p, a, i).actions == rollout(p, b, i).actions);
    PlannerStudent pa;
    PlannerStudent pb;
    CHECK(rollout(p, pa, i).actions == rollout(p, pb, i).actions);
  }
}

TEST_CASE("property: planner success implies exact solvability") {
  int solved = 0;
  for (std::uint64_t i = 0; i < 60; ++i) {
    Rng rng = Rng::stream(41, "planner", i);
    LevelSamplerConfig lc;
    lc.room_choices = {1};
    TaskSamplerConfig tc;
    tc.sequential = SequentialRmConfig{1, 2, RewardKind::sparse};
    Problem p = sample_problem(rng, ProblemMode::level_conditioned, lc, tc);
    PlannerStudent planner;
    if (!rollout(p, planner, i).summary.solved) continue;
    ++solved;
    CHECK(is_solvable_exact(p) != ExactResult::unsolvable);
  }
  CHECK(solved > 0);
}

TEST_CASE("student factory") {
  StudentSpec spec;
  CHECK(dynamic_cast<PlannerStudent*>(student_factory(spec)().get()) != nullptr);
  spec.name = "random";
  CHECK(dynamic_cast<RandomStudent*>(student_factory(spec)().get()) != nullptr);
  spec.name = "oracle";
  CHECK_THROWS_AS(student_factory(spec), std::invalid_argument);
}

TEST_CASE("external students speak line-delimited JSON") {
  ExternalStudent student(EXTERNAL_STUDENT_PATH);
  Problem p = fig1_problem();
  p.rm = chain({"front_key_red"});
  RolloutOptions opt;
  opt.horizon = 4;
  Trajectory t = rollout(p, student, 5, opt);
  CHECK(t.summary.length == 4);
  for (Action a : t.actions) CHECK(a == Action::turn_right);
  for (double v : t.summary.values) CHECK(v == 0.25);
}

TEST_CASE("external values are clamped") {
  ExternalStudent student(EXTERNAL_STUDENT_PATH);
  Problem p{chain({"front_ball", "front_key_red"}), fig1_level()};
  RolloutOptions opt;
  opt.horizon = 2;
  Trajectory t = rollout(p, student, 5, opt);
  for (double v : t.summary.values) CHECK(v == 1.0);
}

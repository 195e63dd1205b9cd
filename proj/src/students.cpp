#include "rmued/students.hpp"

#include <algorithm>
#include <stdexcept>

namespace rmued {

void RandomStudent::reset(const Problem&, std::uint64_t seed) { rng_ = Rng(seed); }

Decision RandomStudent::decide(const StudentView&) {
  return {static_cast<Action>(rng_.uniform_index(kNumActions)), 0.0};
}

StudentFactory student_factory(const StudentSpec& spec) {
  if (spec.name == "planner") {
    PlannerOptions options = spec.planner;
    return [options] { return std::make_unique<PlannerStudent>(options); };
  }
  if (spec.name == "random") return [] { return std::make_unique<RandomStudent>(); };
  if (spec.name == "external") {
    if (spec.command.empty()) throw std::invalid_argument("external student needs a command");
    std::string command = spec.command;
    return [command] { return std::make_unique<ExternalStudent>(command); };
  }
  throw std::invalid_argument("unknown student '" + spec.name + "'");
}

Trajectory rollout(const Problem& problem, Student& student, std::uint64_t seed,
                   const RolloutOptions& options) {
  validate_problem(problem);
  const RewardMachine& rm = problem.rm;
  Trajectory traj;
  Level level = problem.level;
  student.reset(problem, seed);

  StepResult first = rm_step(rm, rm.initial, label(level, options.observation));
  RmState u = first.state;
  RolloutSummary& s = traj.summary;
  s.initial_reward = first.reward;
  s.undiscounted_return = first.reward;

  for (int t = 0; t < options.horizon && u != rm.accepting; ++t) {
    Observation obs = observe(level, options.observation);
    Decision d = student.decide(StudentView{obs, level, rm, u});
    double value = std::clamp(d.value, 0.0, 1.0);
    env_step(level, d.action);
    StepResult step = rm_step(rm, u, label(level, options.observation));
    if (options.record_steps) traj.steps.push_back({obs, d.action, step.reward, value, u});
    traj.actions.push_back(d.action);
    s.values.push_back(value);
    s.rewards.push_back(step.reward);
    s.undiscounted_return += step.reward;
    u = step.state;
  }
  s.length = static_cast<int>(traj.actions.size());
  s.final_rm_state = u;
  s.solved = u == rm.accepting;
  traj.final_level = std::move(level);
  return traj;
}

RolloutSummary replay_actions(const Problem& problem, const std::vector<Action>& actions,
                              const RolloutOptions& options) {
  validate_problem(problem);
  const RewardMachine& rm = problem.rm;
  Level level = problem.level;
  StepResult first = rm_step(rm, rm.initial, label(level, options.observation));
  RmState u = first.state;
  RolloutSummary s;
  s.initial_reward = first.reward;
  s.undiscounted_return = first.reward;
  for (Action a : actions) {
    if (u == rm.accepting || s.length >= options.horizon) break;
    env_step(level, a);
    StepResult step = rm_step(rm, u, label(level, options.observation));
    s.values.push_back(0.0);
    s.rewards.push_back(step.reward);
    s.undiscounted_return += step.reward;
    u = step.state;
    ++s.length;
  }
  s.final_rm_state = u;
  s.solved = u == rm.accepting;
  return s;
}

}  // namespace rmued

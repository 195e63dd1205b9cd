#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmued/problem.hpp"
#include "rmued/rng.hpp"

namespace rmued {

/// What a student sees at each step. `level` is the full simulator state;
/// observation-only students ignore it, the planner reads it.
struct StudentView {
  const Observation& observation;
  const Level& level;
  const RewardMachine& rm;
  RmState rm_state;
};

struct Decision {
  Action action = Action::forward;
  double value = 0.0;  // in [0, 1]
};

class Student {
 public:
  virtual ~Student() = default;
  /// Starts an episode; every random choice of the episode derives from `seed`.
  virtual void reset(const Problem& problem, std::uint64_t seed) = 0;
  virtual Decision decide(const StudentView& view) = 0;
};

class RandomStudent : public Student {
 public:
  void reset(const Problem& problem, std::uint64_t seed) override;
  Decision decide(const StudentView& view) override;

 private:
  Rng rng_;
};

struct PlannerOptions {
  double gamma = 0.99;
  /// Simple RM paths tried per planning call.
  int max_paths = 16;
  /// Preparatory macros (fetch an object, put the held one away) chained
  /// before a subgoal macro.
  int prep_depth = 2;
  int max_plan_length = 512;
  ObservationOptions observation;
};

/// Plans in the simulator over macro actions: navigate (opening closed doors
/// and unlocking locked ones with a held key), pick up, put next to, fetch a
/// key or clear an obstacle. Subgoals follow simple RM paths from the current
/// state; the plan is checked by simulating it with the real step and label
/// functions. Negative literals are not planned for.
///
/// value = gamma^(remaining plan steps - 1), or 0 without a plan. When
/// planning fails the student acts uniformly at random until the RM state
/// changes.
class PlannerStudent : public Student {
 public:
  explicit PlannerStudent(PlannerOptions options = {}) : options_(options) {}

  void reset(const Problem& problem, std::uint64_t seed) override;
  Decision decide(const StudentView& view) override;

  /// Full action plan from (level, u) to the accepting state, if one is found.
  std::optional<std::vector<Action>> plan(const Level& level, const RewardMachine& rm,
                                          RmState u) const;

 private:
  struct Expected {
    RmState rm_state;
    Pos agent;
    Direction direction;
  };

  PlannerOptions options_;
  Rng rng_;
  std::vector<Action> plan_;
  std::vector<Expected> expected_;
  std::size_t cursor_ = 0;
  std::optional<RmState> failed_state_;
};

/// A student running in a child process. One JSON object per line in each
/// direction; every request gets exactly one reply.
///   -> {"type":"reset","seed":S,"problem":{...}}   <- {}
///   -> {"type":"step","observation":{...},"rm_graph":{...},"rm_state":U}
///   <- {"action":A,"value":V}
/// A is an action id 0..5 or its name; V is clamped to [0, 1].
class ExternalStudent : public Student {
 public:
  explicit ExternalStudent(std::string command);
  ~ExternalStudent() override;
  ExternalStudent(const ExternalStudent&) = delete;
  ExternalStudent& operator=(const ExternalStudent&) = delete;

  void reset(const Problem& problem, std::uint64_t seed) override;
  Decision decide(const StudentView& view) override;

 private:
  std::string request(const std::string& line);

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct StudentSpec {
  std::string name = "planner";  // planner | random | external
  PlannerOptions planner;
  std::string command;  // external only
};

using StudentFactory = std::function<std::unique_ptr<Student>()>;

/// Throws std::invalid_argument for unknown names.
StudentFactory student_factory(const StudentSpec& spec);

struct RolloutSummary {
  double undiscounted_return = 0.0;
  /// Reward of the transition fired by the initial label, before any action.
  double initial_reward = 0.0;
  std::vector<double> values;
  std::vector<double> rewards;
  RmState final_rm_state = 0;
  bool solved = false;
  int length = 0;
};

struct TrajectoryStep {
  Observation observation;
  Action action = Action::forward;
  double reward = 0.0;
  double value = 0.0;
  RmState rm_state = 0;  // before the action
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // filled when recording
  std::vector<Action> actions;
  RolloutSummary summary;
  Level final_level;
};

struct RolloutOptions {
  int horizon = 512;
  ObservationOptions observation;
  bool record_steps = false;
};

/// Runs one episode. The initial label is applied before the first action;
/// after every action the RM advances on the label of the new state and the
/// reward is credited to that step. Stops at the accepting state or the
/// horizon. Throws StructuralError for invalid problems.
Trajectory rollout(const Problem& problem, Student& student, std::uint64_t seed,
                   const RolloutOptions& options = {});

/// Replays an action list without a student; values are zero.
RolloutSummary replay_actions(const Problem& problem, const std::vector<Action>& actions,
                              const RolloutOptions& options = {});

}  // namespace rmued

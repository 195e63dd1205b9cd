#pragma once

#include <string>

#include "rmued/gridworld.hpp"
#include "rmued/reward_machine.hpp"

namespace rmued {

/// A task paired with a level.
struct Problem {
  RewardMachine rm;
  Level level;

  friend bool operator==(const Problem&, const Problem&) = default;
};

/// States that are reachable from the initial state and reach the accepting
/// state.
std::vector<bool> live_states(const RewardMachine& rm);

/// Empty string when the problem is valid: structurally sound RM whose
/// states all lie on some initial-to-accepting path, and a valid level.
std::string problem_problem(const Problem& problem);
void validate_problem(const Problem& problem);

}  // namespace rmued

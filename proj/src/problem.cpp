#include "rmued/problem.hpp"

#include <deque>

namespace rmued {

std::vector<bool> live_states(const RewardMachine& rm) {
  const auto n = static_cast<std::size_t>(rm.num_states);
  std::vector<bool> reached(n, false);
  std::deque<RmState> queue{rm.initial};
  reached[static_cast<std::size_t>(rm.initial)] = true;
  while (!queue.empty()) {
    RmState u = queue.front();
    queue.pop_front();
    for (const RmEdge& e : rm.edges)
      if (e.source == u && !reached[static_cast<std::size_t>(e.target)]) {
        reached[static_cast<std::size_t>(e.target)] = true;
        queue.push_back(e.target);
      }
  }
  auto dist = distances_to_accepting(rm);
  std::vector<bool> live(n);
  for (std::size_t i = 0; i < n; ++i) live[i] = reached[i] && dist[i] >= 0;
  return live;
}

std::string problem_problem(const Problem& problem) {
  if (auto p = structural_problem(problem.rm); !p.empty()) return "reward machine: " + p;
  for (bool live : live_states(problem.rm))
    if (!live) return "reward machine: state off every initial-to-accepting path";
  if (auto p = level_problem(problem.level); !p.empty()) return "level: " + p;
  return {};
}

void validate_problem(const Problem& problem) {
  if (auto p = problem_problem(problem); !p.empty())
    throw StructuralError("invalid problem: " + p);
}

}  // namespace rmued

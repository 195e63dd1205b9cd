#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "rmued/alphabet.hpp"
#include "rmued/gridworld.hpp"
#include "rmued/problem.hpp"
#include "rmued/reward_machine.hpp"

namespace fixtures {

using namespace rmued;

inline PropId prop(const std::string& name) { return Alphabet::instance().id(name); }

inline PropSet props(std::initializer_list<const char*> names) {
  PropSet s;
  for (const char* n : names) s.set(to_index(prop(n)));
  return s;
}

inline ObjectDescriptor obj(ObjectKind kind, Color color,
                            DoorState state = DoorState::unspecified) {
  return {kind, color, state};
}

/// u0 -> u1 -> ... -> uA over the given positives, sparse rewards.
inline RewardMachine chain(const std::vector<std::string>& positives) {
  RewardMachine rm;
  rm.num_states = static_cast<int>(positives.size()) + 1;
  rm.initial = 0;
  rm.accepting = rm.num_states - 1;
  for (std::size_t i = 0; i < positives.size(); ++i)
    rm.edges.push_back({static_cast<RmState>(i), static_cast<RmState>(i + 1),
                        Formula{prop(positives[i]), {}}, 0.0});
  return assign_rewards(rm, RewardKind::sparse);
}

/// Adds an edge and recomputes sibling negations.
inline void add_edge(RewardMachine& rm, RmState from, RmState to, const std::string& positive) {
  rm.edges.push_back({from, to, Formula{prop(positive), {}}, 0.0});
  recompute_negations(rm);
}

/// The go-to-ball-then-red-square task.
inline RewardMachine fig1_rm() { return chain({"front_ball", "front_square_red"}); }

/// One room. The agent stands at (3,5) facing north with a blue ball directly
/// ahead; a purple square and a green key touch at (1,2)-(1,1); a red square
/// sits alone at (5,1).
inline Level fig1_level() {
  Level level(1);
  level.agent = {3, 5};
  level.direction = Direction::north;
  level.set_object({3, 4}, obj(ObjectKind::ball, Color::blue));
  level.set_object({1, 2}, obj(ObjectKind::square, Color::purple));
  level.set_object({1, 1}, obj(ObjectKind::key, Color::green));
  level.set_object({5, 1}, obj(ObjectKind::square, Color::red));
  return level;
}

inline Problem fig1_problem() { return {fig1_rm(), fig1_level()}; }

/// Actions that take the agent from the start pose to face the red square.
inline std::vector<Action> fig1_script() {
  using A = Action;
  return {A::turn_right, A::forward,    A::turn_left, A::forward, A::forward,
          A::forward,    A::turn_right, A::forward,   A::turn_left};
}

/// Two rooms split by a door at (6,3). The agent starts in the left room at
/// (2,3) facing east.
inline Level two_rooms(ObjectDescriptor door) {
  Level level(2);
  level.agent = {2, 3};
  level.direction = Direction::east;
  level.set_object({6, 3}, door);
  return level;
}

}  // namespace fixtures

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rmued/problem.hpp"
#include "rmued/rng.hpp"

namespace rmued {

enum class EditKind : std::uint8_t {
  add_rooms,
  remove_rooms,
  add_object,
  remove_object,
  move_agent,
  move_object,
  replace_door,
  replace_non_door,
  switch_proposition,
  add_state,
  remove_state,
  extract_preceding,
  extract_succeeding,
};
inline constexpr int kNumEditKinds = 13;

/// Names use the operator spelling, e.g. "AddRooms".
std::string_view to_string(EditKind kind);
std::optional<EditKind> parse_edit_kind(std::string_view s);
bool is_hindsight(EditKind kind);
bool is_level_edit(EditKind kind);

/// Raised when an edit is applied outside its preconditions.
class EditError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Where the rollout that preceded a mutation ended.
struct RolloutContext {
  RmState final_rm_state = 0;
  Level final_level;
};

/// One applied edit; `seed` drives every random choice it made, so a lineage
/// can be replayed exactly.
struct Edit {
  EditKind kind = EditKind::switch_proposition;
  std::uint64_t seed = 0;
  friend bool operator==(const Edit&, const Edit&) = default;
};

struct MutationConfig {
  int min_edits = 7;
  int max_edits = 10;
  int max_states = 6;
};

bool edit_applicable(const Problem& problem, EditKind kind, const RolloutContext* ctx = nullptr,
                     const MutationConfig& cfg = {});

/// Throws EditError when the edit is not applicable.
Problem apply_edit(const Problem& problem, EditKind kind, Rng& rng,
                   const RolloutContext* ctx = nullptr, const MutationConfig& cfg = {});

struct Mutation {
  Problem problem;
  std::vector<Edit> edits;
};

/// Draws an edit count uniformly from the configured range, then at each step
/// a kind uniformly among the applicable ones. Hindsight kinds are offered
/// only at the first step and only with a context.
Mutation mutate(const Problem& problem, Rng& rng, const RolloutContext* ctx = nullptr,
                const MutationConfig& cfg = {});

/// Re-applies a recorded edit list.
Problem replay_edits(const Problem& problem, const std::vector<Edit>& edits,
                     const RolloutContext* ctx = nullptr, const MutationConfig& cfg = {});

/// Dimensions after AddRooms / RemoveRooms: 1 <-> 2 <-> 4 <-> 6 rooms.
int rooms_after_add(int rooms);
int rooms_after_remove(int rooms);

}  // namespace rmued

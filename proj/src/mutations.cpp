#include "rmued/mutations.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "rmued/samplers.hpp"

namespace rmued {

namespace {

constexpr std::array<std::string_view, kNumEditKinds> kEditNames = {
    "AddRooms",     "RemoveRooms",   "AddObject",          "RemoveObject",
    "MoveAgent",    "MoveObject",    "ReplaceDoor",        "ReplaceNonDoor",
    "SwitchProposition", "AddState", "RemoveState",        "ExtractPreceding",
    "ExtractSucceeding",
};

// ---------------------------------------------------------------------------
// Level edits

/// Copies `src` into a level with `rooms` rooms, shifting every position by
/// `offset`. Non-doors landing outside the new floor and doors landing off
/// the new door slots are dropped; new door slots get random doors. Returns
/// false when the agent would leave the grid.
bool transform_level(const Level& src, int rooms, Pos offset, Rng& rng, Level& out) {
  Level level(rooms);
  Pos agent = src.agent + offset;
  if (!level.in_bounds(agent)) return false;
  for (Pos p : src.object_positions()) {
    Pos q = p + offset;
    if (!level.in_bounds(q)) continue;
    ObjectDescriptor d = *src.object_at(p);
    if (d.is_door() ? level.is_door_slot(q) : level.is_floor(q)) level.set_object(q, d);
  }
  for (Pos slot : door_slots(level.layout()))
    if (!level.object_at(slot)) level.set_object(slot, random_door(rng));
  level.carried = src.carried;
  level.direction = src.direction;
  level.agent = agent;
  out = std::move(level);
  return true;
}

/// Moves the agent to a uniformly chosen free cell when its cell is no longer
/// standable (a door slot that became wall).
void relocate_agent_if_needed(Level& level, Rng& rng) {
  Pos a = level.agent;
  if (level.is_floor(a) && !level.object_at(a)) return;
  if (level.is_door_slot(a)) {
    auto d = level.object_at(a);
    if (d && d->door_state == DoorState::open) return;
  }
  level.agent = rng.pick(level.free_floor_cells());
}

void clamp_object_count(Level& level, Rng& rng) {
  ObjectRange range = object_range(level.rooms());
  while (level.object_count() > range.max) {
    auto non_doors = level.non_door_positions();
    if (non_doors.empty()) {
      level.carried.reset();
      continue;
    }
    level.set_object(rng.pick(non_doors), std::nullopt);
  }
  while (level.object_count() < range.min)
    level.set_object(rng.pick(level.free_floor_cells()), random_non_door(rng));
}

struct RoomOption {
  int rooms;
  Pos offset;
};

std::vector<RoomOption> add_room_options(int rooms) {
  switch (rooms) {
    case 1: return {{2, {0, 0}}, {2, {kRoomStride, 0}}};  // right, left
    case 2: return {{4, {0, 0}}, {4, {0, kRoomStride}}};  // below, above
    case 4: return {{6, {0, 0}}, {6, {kRoomStride, 0}}};  // right, left
    default: return {};
  }
}

std::vector<RoomOption> remove_room_options(int rooms) {
  switch (rooms) {
    case 2: return {{1, {0, 0}}, {1, {-kRoomStride, 0}}};  // drop right, drop left
    case 4: return {{2, {0, 0}}, {2, {0, -kRoomStride}}};  // drop bottom, drop top
    case 6: return {{4, {0, 0}}, {4, {-kRoomStride, 0}}};  // drop right, drop left
    default: return {};
  }
}

Level add_rooms(const Level& src, Rng& rng) {
  auto options = add_room_options(src.rooms());
  const RoomOption& opt = rng.pick(options);
  Level out;
  transform_level(src, opt.rooms, opt.offset, rng, out);
  return out;
}

Level remove_rooms(const Level& src, Rng& rng) {
  // An option is admissible when the agent stays on the grid, i.e. its room
  // survives (an agent on a removed dividing door is relocated).
  std::vector<RoomOption> admissible;
  for (const RoomOption& opt : remove_room_options(src.rooms())) {
    Level probe(opt.rooms);
    if (probe.in_bounds(src.agent + opt.offset)) admissible.push_back(opt);
  }
  const RoomOption& opt = rng.pick(admissible);
  Level out;
  transform_level(src, opt.rooms, opt.offset, rng, out);
  relocate_agent_if_needed(out, rng);
  clamp_object_count(out, rng);
  return out;
}

/// Doors the agent is not standing on.
std::vector<Pos> replaceable_doors(const Level& level) {
  std::vector<Pos> out;
  for (Pos p : level.door_positions())
    if (p != level.agent) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Task edits

RewardMachine finish_rm(RewardMachine rm) {
  rm = prune_and_canonicalize(rm);
  recompute_negations(rm);
  return assign_rewards(std::move(rm), RewardKind::sparse);
}

PropId random_proposition(Rng& rng, const PropSet& excluded = {}) {
  std::vector<std::size_t> candidates;
  candidates.reserve(kAlphabetSize);
  for (std::size_t i = 0; i < kAlphabetSize; ++i)
    if (!excluded[i]) candidates.push_back(i);
  return prop_id(rng.pick(candidates));
}

/// Shifts every state index >= k up by one, freeing index k.
void open_state_slot(RewardMachine& rm, RmState k) {
  auto shift = [k](RmState& s) {
    if (s >= k) ++s;
  };
  for (RmEdge& e : rm.edges) {
    shift(e.source);
    shift(e.target);
  }
  shift(rm.initial);
  shift(rm.accepting);
  ++rm.num_states;
}

RewardMachine switch_proposition(const RewardMachine& src, Rng& rng) {
  RewardMachine rm = src;
  auto i = static_cast<std::size_t>(rng.uniform_index(rm.edges.size()));
  RmEdge& edge = rm.edges[i];
  PropSet excluded;
  for (const RmEdge& e : rm.edges)
    if (e.source == edge.source) excluded.set(to_index(e.formula.positive));
  edge.formula.positive = random_proposition(rng, excluded);
  return finish_rm(std::move(rm));
}

RewardMachine add_state(const RewardMachine& src, Rng& rng) {
  RewardMachine rm = src;
  RmEdge fresh;
  switch (rng.uniform_index(3)) {
    case 0: {  // start
      open_state_slot(rm, 0);
      fresh.source = 0;
      fresh.target = rm.initial;
      rm.initial = 0;
      break;
    }
    case 1: {  // middle: split a uniformly chosen edge u -> v into u -> w -> v
      auto i = static_cast<std::size_t>(rng.uniform_index(rm.edges.size()));
      RmState v = rm.edges[i].target;
      open_state_slot(rm, v);
      rm.edges[i].target = v;
      fresh.source = v;
      fresh.target = v + 1;
      break;
    }
    default: {  // end
      RmState w = rm.num_states;
      ++rm.num_states;
      fresh.source = rm.accepting;
      fresh.target = w;
      rm.accepting = w;
      break;
    }
  }
  fresh.formula.positive = random_proposition(rng);
  rm.edges.push_back(fresh);
  return finish_rm(std::move(rm));
}

std::vector<RmState> successors(const RewardMachine& rm, RmState u) {
  std::vector<RmState> out;
  for (const RmEdge& e : rm.edges)
    if (e.source == u && e.target != u) out.push_back(e.target);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RmState> predecessors(const RewardMachine& rm, RmState v) {
  std::vector<RmState> out;
  for (const RmEdge& e : rm.edges)
    if (e.target == v && e.source != v) out.push_back(e.source);
  std::sort(out.begin(), out.end());
  return out;
}

/// Removes `removed`; `choice` is the new initial (removed initial), the new
/// accepting (removed accepting) or the successor that inherits the incoming
/// edges (middle state).
RewardMachine remove_state_with(const RewardMachine& src, RmState removed, RmState choice) {
  RewardMachine rm = src;
  std::vector<RmEdge> edges;
  if (removed == rm.initial) {
    for (const RmEdge& e : rm.edges)
      if (e.source != removed && e.target != removed) edges.push_back(e);
    rm.initial = choice;
  } else if (removed == rm.accepting) {
    for (const RmEdge& e : rm.edges)
      if (e.target != removed && e.source != choice) edges.push_back(e);
    rm.accepting = choice;
  } else {
    for (const RmEdge& e : rm.edges) {
      if (e.source == removed) continue;
      if (e.target != removed) {
        edges.push_back(e);
        continue;
      }
      RmEdge moved = e;
      moved.target = choice;
      if (moved.source == choice) continue;
      bool duplicate = std::any_of(rm.edges.begin(), rm.edges.end(), [&](const RmEdge& o) {
        return o.source == moved.source && o.target == choice;
      });
      if (!duplicate) edges.push_back(moved);
    }
  }
  rm.edges = std::move(edges);
  return finish_rm(std::move(rm));
}

bool all_live(const RewardMachine& rm) {
  auto live = live_states(rm);
  return std::all_of(live.begin(), live.end(), [](bool b) { return b; });
}

/// Every (state, choice) removal whose result is a valid machine, grouped by
/// the removed state.
std::map<RmState, std::vector<RewardMachine>> removal_options(const RewardMachine& rm) {
  std::map<RmState, std::vector<RewardMachine>> out;
  for (RmState s = 0; s < rm.num_states; ++s) {
    std::vector<RmState> choices;
    if (s == rm.initial) {
      for (RmState t : successors(rm, s))
        if (t != rm.accepting) choices.push_back(t);
    } else if (s == rm.accepting) {
      for (RmState t : predecessors(rm, s))
        if (t != rm.initial) choices.push_back(t);
    } else {
      choices = successors(rm, s);
    }
    for (RmState c : choices) {
      RewardMachine candidate = remove_state_with(rm, s, c);
      if (structural_problem(candidate).empty() && all_live(candidate))
        out[s].push_back(std::move(candidate));
    }
  }
  return out;
}

bool live_state(const RewardMachine& rm, RmState u) {
  if (u < 0 || u >= rm.num_states) return false;
  return live_states(rm)[static_cast<std::size_t>(u)];
}

}  // namespace

std::string_view to_string(EditKind kind) { return kEditNames[static_cast<std::size_t>(kind)]; }

std::optional<EditKind> parse_edit_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEditNames.size(); ++i)
    if (kEditNames[i] == s) return static_cast<EditKind>(i);
  return std::nullopt;
}

bool is_hindsight(EditKind kind) {
  return kind == EditKind::extract_preceding || kind == EditKind::extract_succeeding;
}

bool is_level_edit(EditKind kind) { return kind <= EditKind::replace_non_door; }

int rooms_after_add(int rooms) {
  switch (rooms) {
    case 1: return 2;
    case 2: return 4;
    case 4: return 6;
    default: throw EditError("AddRooms needs 1, 2 or 4 rooms");
  }
}

int rooms_after_remove(int rooms) {
  switch (rooms) {
    case 2: return 1;
    case 4: return 2;
    case 6: return 4;
    default: throw EditError("RemoveRooms needs 2, 4 or 6 rooms");
  }
}

bool edit_applicable(const Problem& problem, EditKind kind, const RolloutContext* ctx,
                     const MutationConfig& cfg) {
  const Level& level = problem.level;
  const RewardMachine& rm = problem.rm;
  const ObjectRange range = object_range(level.rooms());
  switch (kind) {
    case EditKind::add_rooms: return level.rooms() == 1 || level.rooms() == 2 || level.rooms() == 4;
    case EditKind::remove_rooms:
      return level.rooms() == 2 || level.rooms() == 4 || level.rooms() == 6;
    case EditKind::add_object:
      return level.object_count() < range.max && !level.free_floor_cells().empty();
    case EditKind::remove_object:
      return level.object_count() > range.min && !level.non_door_positions().empty();
    case EditKind::move_agent: return !level.free_floor_cells().empty();
    case EditKind::move_object:
      return !level.free_floor_cells().empty() && !level.non_door_positions().empty();
    case EditKind::replace_door: return !replaceable_doors(level).empty();
    case EditKind::replace_non_door: return !level.non_door_positions().empty();
    case EditKind::switch_proposition: return !rm.edges.empty();
    case EditKind::add_state: return rm.num_states < cfg.max_states;
    case EditKind::remove_state: return rm.num_states > 2 && !removal_options(rm).empty();
    case EditKind::extract_preceding:
    case EditKind::extract_succeeding:
      return ctx != nullptr && ctx->final_rm_state != rm.initial &&
             ctx->final_rm_state != rm.accepting && live_state(rm, ctx->final_rm_state) &&
             (kind == EditKind::extract_preceding || level_problem(ctx->final_level).empty());
  }
  return false;
}

Problem apply_edit(const Problem& problem, EditKind kind, Rng& rng, const RolloutContext* ctx,
                   const MutationConfig& cfg) {
  if (!edit_applicable(problem, kind, ctx, cfg))
    throw EditError(std::string(to_string(kind)) + " is not applicable");
  Problem out = problem;
  Level& level = out.level;
  switch (kind) {
    case EditKind::add_rooms: level = add_rooms(problem.level, rng); break;
    case EditKind::remove_rooms: level = remove_rooms(problem.level, rng); break;
    case EditKind::add_object:
      level.set_object(rng.pick(level.free_floor_cells()), random_non_door(rng));
      break;
    case EditKind::remove_object: level.set_object(rng.pick(level.non_door_positions()), std::nullopt); break;
    case EditKind::move_agent:
      level.agent = rng.pick(level.free_floor_cells());
      level.direction = static_cast<Direction>(rng.uniform_index(4));
      break;
    case EditKind::move_object: {
      Pos from = rng.pick(level.non_door_positions());
      Pos to = rng.pick(level.free_floor_cells());
      auto d = level.object_at(from);
      level.set_object(from, std::nullopt);
      level.set_object(to, d);
      break;
    }
    case EditKind::replace_door: level.set_object(rng.pick(replaceable_doors(level)), random_door(rng)); break;
    case EditKind::replace_non_door:
      level.set_object(rng.pick(level.non_door_positions()), random_non_door(rng));
      break;
    case EditKind::switch_proposition: out.rm = switch_proposition(problem.rm, rng); break;
    case EditKind::add_state: out.rm = add_state(problem.rm, rng); break;
    case EditKind::remove_state: {
      auto options = removal_options(problem.rm);
      auto it = options.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.uniform_index(options.size())));
      out.rm = rng.pick(it->second);
      break;
    }
    case EditKind::extract_preceding: {
      RewardMachine rm = problem.rm;
      rm.accepting = ctx->final_rm_state;
      std::erase_if(rm.edges, [&](const RmEdge& e) { return e.source == rm.accepting; });
      out.rm = finish_rm(std::move(rm));
      break;
    }
    case EditKind::extract_succeeding: {
      RewardMachine rm = problem.rm;
      rm.initial = ctx->final_rm_state;
      out.rm = finish_rm(std::move(rm));
      out.level = ctx->final_level;
      break;
    }
  }
  return out;
}

Mutation mutate(const Problem& problem, Rng& rng, const RolloutContext* ctx,
                const MutationConfig& cfg) {
  if (cfg.min_edits < 0 || cfg.max_edits < cfg.min_edits)
    throw std::invalid_argument("edit count range is empty");
  Mutation m{problem, {}};
  const int count = rng.uniform_int(cfg.min_edits, cfg.max_edits);
  for (int step = 0; step < count; ++step) {
    const RolloutContext* step_ctx = step == 0 ? ctx : nullptr;
    std::vector<EditKind> kinds;
    for (int k = 0; k < kNumEditKinds; ++k) {
      auto kind = static_cast<EditKind>(k);
      if (edit_applicable(m.problem, kind, step_ctx, cfg)) kinds.push_back(kind);
    }
    Edit edit{rng.pick(kinds), rng.next_u64()};
    Rng edit_rng(edit.seed);
    m.problem = apply_edit(m.problem, edit.kind, edit_rng, step_ctx, cfg);
    m.edits.push_back(edit);
  }
  return m;
}

Problem replay_edits(const Problem& problem, const std::vector<Edit>& edits,
                     const RolloutContext* ctx, const MutationConfig& cfg) {
  Problem out = problem;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    Rng edit_rng(edits[i].seed);
    out = apply_edit(out, edits[i].kind, edit_rng, i == 0 ? ctx : nullptr, cfg);
  }
  return out;
}

}  // namespace rmued

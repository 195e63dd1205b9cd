#include "rmued/solvability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "rmued/parallel.hpp"

namespace rmued {

namespace {

bool contains(const std::vector<Pos>& v, Pos p) { return std::find(v.begin(), v.end(), p) != v.end(); }

bool passable(const Level& level, Pos p, const std::vector<Pos>& opened) {
  if (!level.in_bounds(p) || level.is_wall(p)) return false;
  auto object = level.object_at(p);
  if (object && object->is_door() && object->door_state == DoorState::locked)
    return contains(opened, p);
  return true;
}

/// Whether some pose on a reachable cell sees both cells in its 5x5 crop.
bool pair_visible(const Level& level, const ReachabilityNode& node, Pos a, Pos b) {
  for (int y = 0; y < level.height(); ++y)
    for (int x = 0; x < level.width(); ++x) {
      Pos c{x, y};
      if (!node.reachable(level, c)) continue;
      for (int d = 0; d < 4; ++d) {
        Pos f = forward_vector(static_cast<Direction>(d));
        Pos r = right_vector(static_cast<Direction>(d));
        auto in_view = [&](Pos p) {
          int dx = p.x - c.x, dy = p.y - c.y;
          int ahead = dx * f.x + dy * f.y;
          int side = dx * r.x + dy * r.y;
          return ahead >= 0 && ahead < kViewSize && side >= -kViewSize / 2 && side <= kViewSize / 2;
        };
        if (in_view(a) && in_view(b)) return true;
      }
    }
  return false;
}

bool path_satisfiable(const Level& level, const std::vector<PropId>& props, std::size_t i,
                      const std::vector<Pos>& opened) {
  ReachabilityNode node = reachable_set(level, opened);
  while (i < props.size() && proposition_satisfiable(level, node, props[i])) ++i;
  if (i == props.size()) return true;
  for (const ReachableObject& door : node.reachable_objects) {
    if (!door.descriptor.is_door() || door.descriptor.door_state != DoorState::locked ||
        door.opened)
      continue;
    bool key = std::any_of(node.reachable_objects.begin(), node.reachable_objects.end(),
                           [&](const ReachableObject& o) {
                             return o.descriptor.kind == ObjectKind::key &&
                                    o.descriptor.color == door.descriptor.color;
                           });
    if (!key) continue;
    auto next = opened;
    next.push_back(door.pos);
    if (path_satisfiable(level, props, i, next)) return true;
  }
  return false;
}

}  // namespace

ReachabilityNode reachable_set(const Level& level, const std::vector<Pos>& opened) {
  ReachabilityNode node;
  node.opened_doors = opened;
  node.reachable_cells.assign(static_cast<std::size_t>(level.width() * level.height()), false);
  auto idx = [&](Pos p) { return static_cast<std::size_t>(p.y * level.width() + p.x); };
  std::deque<Pos> queue{level.agent};
  node.reachable_cells[idx(level.agent)] = true;
  std::vector<Pos> boundary;
  while (!queue.empty()) {
    Pos p = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      Pos q = p + forward_vector(static_cast<Direction>(d));
      if (!level.in_bounds(q) || node.reachable_cells[idx(q)]) continue;
      if (passable(level, q, opened)) {
        node.reachable_cells[idx(q)] = true;
        queue.push_back(q);
      } else if (auto object = level.object_at(q); object && object->is_door() &&
                                                    !contains(boundary, q)) {
        boundary.push_back(q);
      }
    }
  }
  for (Pos p : level.object_positions()) {
    if (!node.reachable_cells[idx(p)] && !contains(boundary, p)) continue;
    ObjectDescriptor d = *level.object_at(p);
    node.reachable_objects.push_back({p, d, false, d.is_door() && contains(opened, p)});
  }
  if (level.carried) node.reachable_objects.push_back({level.agent, *level.carried, true, false});
  return node;
}

bool pattern_matches(const ObjectDescriptor& pattern, const ReachableObject& object) {
  const ObjectDescriptor& d = object.descriptor;
  if (pattern.kind != d.kind) return false;
  if (pattern.color != Color::unspecified && pattern.color != d.color) return false;
  if (!d.is_door() || pattern.door_state == DoorState::unspecified) return true;
  if (d.door_state == DoorState::locked && !object.opened)
    return pattern.door_state == DoorState::locked;
  return pattern.door_state != DoorState::locked;
}

bool proposition_satisfiable(const Level& level, const ReachabilityNode& node, PropId id) {
  const Proposition& p = Alphabet::instance().at(id);
  const auto& objects = node.reachable_objects;
  switch (p.location) {
    case Location::front:
      return std::any_of(objects.begin(), objects.end(),
                         [&](const ReachableObject& o) { return pattern_matches(p.first, o); });
    case Location::carrying:
      return std::any_of(objects.begin(), objects.end(), [&](const ReachableObject& o) {
        return !o.descriptor.is_door() && pattern_matches(p.first, o);
      });
    case Location::next: {
      for (std::size_t i = 0; i < objects.size(); ++i)
        for (std::size_t j = 0; j < objects.size(); ++j) {
          if (i == j || (objects[i].descriptor.is_door() && objects[j].descriptor.is_door()))
            continue;
          if (pattern_matches(p.first, objects[i]) && pattern_matches(*p.second, objects[j]))
            return true;
        }
      // Adjacent pairs that stay fixed outside the reachable region can still
      // be seen from inside it.
      auto positions = level.object_positions();
      for (Pos a : positions)
        for (int d = 0; d < 2; ++d) {
          Pos b = a + (d == 0 ? Pos{1, 0} : Pos{0, 1});
          auto oa = level.object_at(a);
          auto ob = level.object_at(b);
          if (!ob || (oa->is_door() && ob->is_door())) continue;
          ReachableObject ra{a, *oa, false, contains(node.opened_doors, a)};
          ReachableObject rb{b, *ob, false, contains(node.opened_doors, b)};
          bool match = (pattern_matches(p.first, ra) && pattern_matches(*p.second, rb)) ||
                       (pattern_matches(p.first, rb) && pattern_matches(*p.second, ra));
          if (match && pair_visible(level, node, a, b)) return true;
        }
      return false;
    }
  }
  return false;
}

bool is_solvable_static(const Problem& problem) {
  for (const RmPath& path : enumerate_paths(problem.rm)) {
    std::vector<PropId> props;
    for (const RmEdge& e : path) props.push_back(e.formula.positive);
    if (path_satisfiable(problem.level, props, 0, {})) return true;
  }
  return false;
}

namespace {

/// Cells the agent could ever occupy: a fixed point over door passability,
/// where a locked door opens once a key of its color lies inside the region
/// or is held.
std::vector<bool> ever_reachable(const Level& level) {
  const int w = level.width();
  auto at = [w](Pos p) { return static_cast<std::size_t>(p.y * w + p.x); };
  std::vector<bool> region(static_cast<std::size_t>(w * level.height()), false);
  for (;;) {
    std::vector<bool> keys(kNumColors, false);
    if (level.carried && level.carried->kind == ObjectKind::key)
      keys[static_cast<std::size_t>(level.carried->color)] = true;
    for (Pos p : level.non_door_positions())
      if (region[at(p)] && level.object_at(p)->kind == ObjectKind::key)
        keys[static_cast<std::size_t>(level.object_at(p)->color)] = true;
    std::vector<bool> next(region.size(), false);
    std::vector<Pos> stack{level.agent};
    next[at(level.agent)] = true;
    while (!stack.empty()) {
      Pos p = stack.back();
      stack.pop_back();
      for (int d = 0; d < 4; ++d) {
        Pos q = p + forward_vector(static_cast<Direction>(d));
        if (!level.in_bounds(q) || level.is_wall(q) || next[at(q)]) continue;
        if (auto o = level.object_at(q); o && o->is_door() && o->door_state == DoorState::locked &&
                                         !keys[static_cast<std::size_t>(o->color)])
          continue;
        next[at(q)] = true;
        stack.push_back(q);
      }
    }
    if (next == region) return region;
    region = std::move(next);
  }
}

/// Propositions that could appear in some label of some state reachable from
/// the level. Loose objects inside the agent's ever-reachable region may end
/// up anywhere in it; everything else stays put, and doors the agent can walk
/// through may take either of open and closed.
PropSet possible_labels(const Level& level) {
  const Alphabet& alphabet = Alphabet::instance();
  const std::vector<bool> region = ever_reachable(level);
  auto inside = [&](Pos p) { return region[static_cast<std::size_t>(p.y * level.width() + p.x)]; };
  auto touches = [&](Pos p) {
    for (int d = 0; d < 4; ++d) {
      Pos q = p + forward_vector(static_cast<Direction>(d));
      if (level.in_bounds(q) && inside(q)) return true;
    }
    return false;
  };

  std::vector<std::vector<int>> movable;  // descriptor variants
  std::vector<std::vector<int>> reachable_doors;
  if (level.carried) movable.push_back({descriptor_index(*level.carried)});
  for (Pos p : level.object_positions()) {
    const ObjectDescriptor d = *level.object_at(p);
    if (!d.is_door()) {
      if (inside(p)) movable.push_back({descriptor_index(d)});
      continue;
    }
    if (inside(p)) {
      std::vector<int> variants{descriptor_index(d)};
      for (DoorState s : {DoorState::open, DoorState::closed})
        if (s != d.door_state) variants.push_back(descriptor_index({ObjectKind::door, d.color, s}));
      reachable_doors.push_back(std::move(variants));
    } else if (touches(p)) {
      reachable_doors.push_back({descriptor_index(d)});
    }
  }

  PropSet out;
  for (const auto& m : movable)
    for (int a : m) {
      out |= alphabet.generalizations(*alphabet.front(a));
      out |= alphabet.generalizations(*alphabet.carrying(a));
    }
  for (const auto& door : reachable_doors)
    for (int a : door) out |= alphabet.generalizations(*alphabet.front(a));
  for (std::size_t i = 0; i < movable.size(); ++i) {
    for (std::size_t j = 0; j < movable.size(); ++j)
      if (i != j)
        for (int a : movable[i])
          for (int b : movable[j])
            if (auto n = alphabet.next(a, b)) out |= alphabet.generalizations(*n);
    for (const auto& door : reachable_doors)
      for (int a : movable[i])
        for (int b : door)
          if (auto n = alphabet.next(a, b)) out |= alphabet.generalizations(*n);
  }
  // Pairs of objects that never move, in their current states.
  for (Pos p : level.object_positions())
    for (Pos step : {Pos{1, 0}, Pos{0, 1}}) {
      Pos q = p + step;
      auto op = level.object_at(p);
      auto oq = level.object_at(q);
      if (!oq) continue;
      if (auto n = alphabet.next(descriptor_index(*op), descriptor_index(*oq)))
        out |= alphabet.generalizations(*n);
    }
  // Movable objects next to doors in the region were counted above; a door
  // in the region adjacent to a fixed object cannot occur, since both sides
  // of a passable door lie in the region.
  return out;
}

struct ExactCodec {
  Level base;  // walls and door slots; objects cleared
  std::vector<Pos> slots;

  explicit ExactCodec(const Level& level) : base(level.rooms()), slots(door_slots(level.layout())) {
    for (Pos p : slots) base.set_object(p, level.object_at(p));
  }

  std::string encode(const Level& level, RmState u) const {
    std::string key;
    key.reserve(8 + slots.size() + 3 * 8);
    key.push_back(static_cast<char>(level.agent.x));
    key.push_back(static_cast<char>(level.agent.y));
    key.push_back(static_cast<char>(level.direction));
    key.push_back(static_cast<char>(level.carried ? descriptor_index(*level.carried) + 1 : 0));
    key.push_back(static_cast<char>(u));
    for (Pos p : slots) key.push_back(static_cast<char>(level.cell_code(p)));
    for (Pos p : level.object_positions()) {
      if (level.is_door_slot(p)) continue;
      key.push_back(static_cast<char>(p.x));
      key.push_back(static_cast<char>(p.y));
      key.push_back(static_cast<char>(level.cell_code(p)));
    }
    return key;
  }

  Level decode(const std::string& key, RmState& u) const {
    Level level = base;
    level.agent = {static_cast<unsigned char>(key[0]), static_cast<unsigned char>(key[1])};
    level.direction = static_cast<Direction>(key[2]);
    int carried = static_cast<unsigned char>(key[3]);
    if (carried) level.carried = descriptor_at(carried - 1);
    u = static_cast<unsigned char>(key[4]);
    std::size_t k = 5;
    for (Pos p : slots) level.set_object(p, descriptor_at(static_cast<unsigned char>(key[k++]) - 1));
    for (; k + 2 < key.size(); k += 3) {
      Pos p{static_cast<unsigned char>(key[k]), static_cast<unsigned char>(key[k + 1])};
      level.set_object(p, descriptor_at(static_cast<unsigned char>(key[k + 2]) - 1));
    }
    return level;
  }
};

}  // namespace

ExactResult is_solvable_exact(const Problem& problem, const ExactOptions& options) {
  const RewardMachine& rm = problem.rm;

  RewardMachine pruned = rm;
  PropSet possible = possible_labels(problem.level);
  std::erase_if(pruned.edges,
                [&](const RmEdge& e) { return !possible.test(to_index(e.formula.positive)); });
  if (distances_to_accepting(pruned)[static_cast<std::size_t>(rm.initial)] < 0)
    return ExactResult::unsolvable;

  if (options.step_limit <= 0) return ExactResult::unsolvable;
  ExactCodec codec(problem.level);
  RmState u0 = rm_step(rm, rm.initial, label(problem.level, options.observation)).state;
  if (u0 == rm.accepting) return ExactResult::solvable;

  // Best-first on (RM distance to accepting, depth): subgoals are pursued
  // one at a time, which finds solvable problems long before the space is
  // exhausted. A state reached again with a smaller depth is reopened, so the
  // step limit stays exact.
  const std::vector<int> dist = distances_to_accepting(rm);
  using Item = std::tuple<int, int, std::string>;  // (rm distance, depth, key)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::unordered_map<std::string, int> depth_of;
  std::string start = codec.encode(problem.level, u0);
  depth_of.emplace(start, 0);
  queue.emplace(dist[static_cast<std::size_t>(u0)], 0, std::move(start));
  while (!queue.empty()) {
    auto [rm_dist, depth, key] = queue.top();
    queue.pop();
    if (depth_of[key] != depth || depth >= options.step_limit) continue;
    RmState u = 0;
    Level level = codec.decode(key, u);
    for (int a = 0; a < kNumActions; ++a) {
      Level next = level;
      env_step(next, static_cast<Action>(a));
      RmState v = rm_step(rm, u, label(next, options.observation)).state;
      if (v == rm.accepting) return ExactResult::solvable;
      const int d = dist[static_cast<std::size_t>(v)];
      if (d < 0) continue;
      std::string next_key = codec.encode(next, v);
      auto [it, fresh] = depth_of.try_emplace(next_key, depth + 1);
      if (!fresh) {
        if (it->second <= depth + 1) continue;
        it->second = depth + 1;
      }
      if (depth_of.size() > options.state_budget) return ExactResult::indeterminate;
      queue.emplace(d, depth + 1, std::move(next_key));
    }
  }
  return ExactResult::unsolvable;
}

SolvabilityRate batch_solvability_rate(std::uint64_t seed, ProblemMode mode,
                                       const LevelSamplerConfig& level_cfg,
                                       const TaskSamplerConfig& task_cfg, int batches,
                                       int batch_size, int jobs) {
  SolvabilityRate out;
  for (int b = 0; b < batches; ++b) {
    std::vector<char> solvable(static_cast<std::size_t>(batch_size), 0);
    parallel_for(solvable.size(), jobs, [&](std::size_t i) {
      Rng rng = Rng::stream(seed, "solvability", static_cast<std::uint64_t>(b), i);
      solvable[i] = is_solvable_static(sample_problem(rng, mode, level_cfg, task_cfg));
    });
    double count = static_cast<double>(std::count(solvable.begin(), solvable.end(), 1));
    out.batch_rates.push_back(100.0 * count / batch_size);
  }
  for (double r : out.batch_rates) out.mean += r;
  out.mean /= static_cast<double>(std::max(batches, 1));
  for (double r : out.batch_rates) out.stddev += (r - out.mean) * (r - out.mean);
  out.stddev = std::sqrt(out.stddev / static_cast<double>(std::max(batches, 1)));
  return out;
}

}  // namespace rmued

#include "rmued/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace rmued {

namespace {

constexpr int kRetryBudget = 20;
constexpr int kWalkRetryBudget = 100;

PropId pick_uniform(Rng& rng, const PropSet& set) {
  const std::size_t count = set.count();
  if (count == 0) throw SamplingError("no admissible proposition");
  std::size_t k = static_cast<std::size_t>(rng.uniform_index(count));
  std::size_t i = set._Find_first();
  while (k-- > 0) i = set._Find_next(i);
  return prop_id(i);
}

PropId pick_weighted(Rng& rng, const PropSet& set, const std::vector<double>& prior) {
  if (prior.empty()) return pick_uniform(rng, set);
  std::vector<double> weights(kAlphabetSize, 0.0);
  bool any = false;
  for (std::size_t i = set._Find_first(); i < kAlphabetSize; i = set._Find_next(i)) {
    weights[i] = prior[i];
    any = any || prior[i] > 0.0;
  }
  if (!any) throw SamplingError("no admissible proposition under the prior");
  return prop_id(rng.categorical(weights));
}

/// Concrete instance of a descriptor with unspecified attributes filled
/// uniformly.
ObjectDescriptor instantiate(Rng& rng, ObjectDescriptor d) {
  if (d.color == Color::unspecified) d.color = random_color(rng);
  if (d.is_door() && d.door_state == DoorState::unspecified)
    d.door_state = static_cast<DoorState>(rng.uniform_index(kNumDoorStates));
  return d;
}

ObjectRange effective_range(const LevelSamplerConfig& cfg, int rooms) {
  ObjectRange range = object_range(rooms);
  if (cfg.object_count) {
    range.min = std::max(range.min, cfg.object_count->min);
    range.max = std::min(range.max, cfg.object_count->max);
  }
  return range;
}

/// Builds a level with the given doors (one per slot, in slot order) and
/// non-door objects placed uniformly, then places the agent.
Level build_level(Rng& rng, int rooms, const std::vector<ObjectDescriptor>& doors,
                  const std::vector<ObjectDescriptor>& non_doors) {
  Level level(rooms);
  auto slots = door_slots(level.layout());
  for (std::size_t i = 0; i < slots.size(); ++i) level.set_object(slots[i], doors[i]);
  // Agent position is chosen last, so no cell is reserved yet.
  level.agent = {-1, -1};
  std::vector<Pos> free;
  for (int y = 1; y < level.height() - 1; ++y)
    for (int x = 1; x < level.width() - 1; ++x)
      if (level.is_floor({x, y})) free.push_back({x, y});
  for (const ObjectDescriptor& d : non_doors) {
    std::size_t k = static_cast<std::size_t>(rng.uniform_index(free.size()));
    level.set_object(free[k], d);
    free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
  }
  level.agent = free[static_cast<std::size_t>(rng.uniform_index(free.size()))];
  level.direction = static_cast<Direction>(rng.uniform_index(4));
  return level;
}

bool acyclic_structure(RmStructure s) { return s != RmStructure::cyclic; }

}  // namespace

Color random_color(Rng& rng) { return static_cast<Color>(rng.uniform_index(kNumColors)); }

ObjectDescriptor random_door(Rng& rng) {
  Color c = random_color(rng);
  return {ObjectKind::door, c, static_cast<DoorState>(rng.uniform_index(kNumDoorStates))};
}

ObjectDescriptor random_non_door(Rng& rng) {
  auto kind = static_cast<ObjectKind>(rng.uniform_index(3));
  return {kind, random_color(rng), DoorState::unspecified};
}

PropSet all_propositions() {
  PropSet all;
  all.set();
  return all;
}

void check_config(const LevelSamplerConfig& cfg) {
  if (cfg.room_choices.empty()) throw ConfigError("room_choices is empty");
  for (int r : cfg.room_choices)
    if (r != 1 && r != 2 && r != 4 && r != 6) throw ConfigError("room choices must be 1, 2, 4 or 6");
  for (int r : cfg.room_choices) {
    ObjectRange range = effective_range(cfg, r);
    if (range.min > range.max)
      throw ConfigError("object count range is empty for " + std::to_string(r) + " rooms");
  }
}

Level sample_level(Rng& rng, const LevelSamplerConfig& cfg) {
  check_config(cfg);
  int rooms = rng.pick(cfg.room_choices);
  ObjectRange range = effective_range(cfg, rooms);
  int count = rng.uniform_int(range.min, range.max);
  int doors = door_count(rooms);
  std::vector<ObjectDescriptor> door_objects;
  for (int i = 0; i < doors; ++i) door_objects.push_back(random_door(rng));
  std::vector<ObjectDescriptor> non_doors;
  for (int i = doors; i < count; ++i) non_doors.push_back(random_non_door(rng));
  return build_level(rng, rooms, door_objects, non_doors);
}

std::string_view to_string(RmStructure s) {
  switch (s) {
    case RmStructure::sequential: return "sequential";
    case RmStructure::dag: return "dag";
    case RmStructure::cyclic: return "cyclic";
  }
  return "sequential";
}

std::optional<RmStructure> parse_rm_structure(std::string_view s) {
  if (s == "sequential") return RmStructure::sequential;
  if (s == "dag") return RmStructure::dag;
  if (s == "cyclic") return RmStructure::cyclic;
  return std::nullopt;
}

std::string_view to_string(ProblemMode m) {
  switch (m) {
    case ProblemMode::independent: return "independent";
    case ProblemMode::level_conditioned: return "level_conditioned";
    case ProblemMode::task_conditioned: return "task_conditioned";
  }
  return "independent";
}

std::optional<ProblemMode> parse_problem_mode(std::string_view s) {
  if (s == "independent") return ProblemMode::independent;
  if (s == "level_conditioned") return ProblemMode::level_conditioned;
  if (s == "task_conditioned") return ProblemMode::task_conditioned;
  return std::nullopt;
}

RewardMachine sample_sequential_rm(Rng& rng, const SequentialRmConfig& cfg,
                                   const PropSet* allowed) {
  if (cfg.min_length < 1 || cfg.max_length < cfg.min_length)
    throw ConfigError("sequential length range is invalid");
  const PropSet full = all_propositions();
  const PropSet& props = allowed ? *allowed : full;
  if (props.none()) throw ConfigError("allowed proposition set is empty");
  int length = rng.uniform_int(cfg.min_length, cfg.max_length);
  RewardMachine rm;
  rm.num_states = length + 1;
  rm.initial = 0;
  rm.accepting = length;
  for (int i = 0; i < length; ++i) {
    RmEdge e;
    e.source = i;
    e.target = i + 1;
    e.formula.positive = pick_uniform(rng, props);
    rm.edges.push_back(e);
  }
  return assign_rewards(std::move(rm), cfg.reward);
}

std::vector<std::vector<int>> ordered_partitions(int n) {
  std::vector<std::vector<int>> out;
  if (n <= 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> current;
  std::function<void(int)> rec = [&](int remaining) {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (int first = remaining; first >= 1; --first) {
      current.push_back(first);
      rec(remaining - first);
      current.pop_back();
    }
  };
  rec(n);
  return out;
}

HierarchyTree sample_hierarchy_structure(Rng& rng, int m, const std::vector<double>& weights) {
  if (m < 1) throw ConfigError("hierarchy size must be at least 1");
  auto partitions = ordered_partitions(m / 2);
  std::size_t choice = 0;
  if (!weights.empty()) {
    if (weights.size() != partitions.size())
      throw ConfigError("partition weights have length " + std::to_string(weights.size()) +
                        ", expected " + std::to_string(partitions.size()));
    choice = rng.categorical(weights);
  } else {
    choice = static_cast<std::size_t>(rng.uniform_index(partitions.size()));
  }
  HierarchyTree tree;
  tree.num_nodes = m;
  int next_node = 1;
  int last = 0;
  const auto& parts = partitions[choice];
  for (std::size_t parent = 0; parent < parts.size() && next_node < m; ++parent)
    for (int c = 0; c < parts[parent] && next_node < m; ++c) {
      tree.edges.emplace_back(static_cast<int>(parent), next_node);
      last = next_node++;
    }
  while (next_node < m) {
    tree.edges.emplace_back(last, next_node);
    last = next_node++;
  }
  return tree;
}

void check_config(const RandomWalkConfig& cfg) {
  if (cfg.num_states < 2) throw ConfigError("random-walk machines need at least two states");
  if (!(cfg.connectivity > 0.0)) throw ConfigError("connectivity must be positive");
  if (cfg.restart < 0.0 || cfg.restart > 1.0) throw ConfigError("restart must lie in [0, 1]");
  if (cfg.max_paths < 0) throw ConfigError("max_paths must be non-negative");
  if (cfg.hierarchy_size < 1) throw ConfigError("hierarchy size must be at least 1");
  if (!cfg.proposition_prior.empty() && cfg.proposition_prior.size() != kAlphabetSize)
    throw ConfigError("proposition prior must have one weight per proposition");
  if (cfg.call_top_weight < 0.0) throw ConfigError("call_top_weight must be non-negative");
}

RewardMachine sample_rw_structure(Rng& rng, const RandomWalkConfig& cfg, bool root) {
  check_config(cfg);
  const int n = cfg.num_states;
  const int accepting = n - 1;
  std::vector<std::vector<double>> matrix(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < accepting; ++i) {
    auto& row = matrix[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      bool admissible = false;
      switch (cfg.structure) {
        case RmStructure::sequential: admissible = j == i + 1; break;
        case RmStructure::dag: admissible = j > i; break;
        case RmStructure::cyclic: admissible = j != i; break;
      }
      if (!root && i == 0) admissible = j == 1;
      if (admissible) row[static_cast<std::size_t>(j)] = rng.uniform01();
    }
    double total = 0.0;
    for (double w : row) total += w;
    if (!(total > 0.0)) throw ConfigError("transition mask leaves a state without successors");
    for (double& w : row) w /= total;
  }

  const int cap = std::max(1, static_cast<int>(std::lround(cfg.connectivity * n)));
  std::set<std::pair<int, int>> edges;
  auto path_count = [&](const std::set<std::pair<int, int>>& candidate) {
    RewardMachine g;
    g.num_states = n;
    g.accepting = accepting;
    for (auto [s, t] : candidate) g.edges.push_back({s, t, {}, 0.0});
    return path_metrics(g).num_paths;
  };

  bool accepted_any = false;
  int failures = 0;
  while (true) {
    std::vector<std::pair<int, int>> walk;
    int u = 0;
    for (int step = 0; step < cap && u != accepting; ++step) {
      int v = static_cast<int>(rng.categorical(matrix[static_cast<std::size_t>(u)]));
      walk.emplace_back(u, v);
      u = v;
    }
    bool ok = u == accepting;
    if (ok) {
      auto candidate = edges;
      candidate.insert(walk.begin(), walk.end());
      if (acyclic_structure(cfg.structure) && cfg.max_paths > 0 &&
          path_count(candidate) > cfg.max_paths)
        ok = false;
      else
        edges = std::move(candidate);
    }
    if (ok) {
      accepted_any = true;
    } else if (!accepted_any && ++failures >= kWalkRetryBudget) {
      throw SamplingError("random walks failed to reach the accepting state");
    }
    if (accepted_any && !rng.bernoulli(cfg.restart)) break;
  }

  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  for (auto [s, t] : edges) visited[static_cast<std::size_t>(s)] = visited[static_cast<std::size_t>(t)] = true;
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s)
    if (visited[static_cast<std::size_t>(s)]) remap[static_cast<std::size_t>(s)] = next++;
  RewardMachine rm;
  rm.num_states = next;
  rm.initial = 0;
  rm.accepting = next - 1;
  for (auto [s, t] : edges)
    rm.edges.push_back({remap[static_cast<std::size_t>(s)], remap[static_cast<std::size_t>(t)], {}, 0.0});
  return rm;
}

RewardMachine label_rm_propositions(RewardMachine graph, Rng& rng, const PropSet& allowed,
                                    const std::vector<double>& prior) {
  const Alphabet& alphabet = Alphabet::instance();
  std::vector<std::size_t> order(graph.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<bool> assigned(graph.edges.size(), false);
  for (std::size_t idx : order) {
    const RmEdge& edge = graph.edges[idx];
    PropSet mask = allowed;
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
      if (!assigned[k]) continue;
      const RmEdge& other = graph.edges[k];
      PropId q = other.formula.positive;
      // an incoming proposition must not already imply this one
      if (other.target == edge.source) mask &= ~alphabet.generalizations(q);
      // this proposition must not already imply an outgoing one of the target
      if (other.source == edge.target) mask &= ~alphabet.specializations(q);
      // siblings must not imply each other in either direction
      if (other.source == edge.source)
        mask &= ~(alphabet.generalizations(q) | alphabet.specializations(q));
    }
    if (mask.none()) throw SamplingError("proposition mask is empty");
    graph.edges[idx].formula.positive = pick_weighted(rng, mask, prior);
    assigned[idx] = true;
  }
  recompute_negations(graph);
  return graph;
}

HierarchySpec label_rm_calls(HierarchySpec spec, Rng& rng, double top_weight) {
  const Alphabet& alphabet = Alphabet::instance();
  spec.call_labels.assign(spec.machines.size(), {});
  for (std::size_t i = 0; i < spec.machines.size(); ++i) {
    const RewardMachine& rm = spec.machines[i];
    auto children = spec.children(static_cast<int>(i));
    auto& labels = spec.call_labels[i];
    for (const RmEdge& e : rm.edges) {
      if (i != 0 && e.source == rm.initial) {
        labels.emplace_back();
        continue;
      }
      std::vector<int> candidates;
      for (int c : children) {
        const RewardMachine& child = spec.machines[static_cast<std::size_t>(c)];
        auto out = child.outgoing(child.initial);
        if (out.size() != 1) continue;
        if (!alphabet.contradicts(e.formula.positive, out.front()->formula.positive))
          candidates.push_back(c);
      }
      std::vector<double> weights{top_weight};
      weights.insert(weights.end(), candidates.size(), 1.0);
      double total = 0.0;
      for (double w : weights) total += w;
      if (!(total > 0.0)) {
        labels.emplace_back();
        continue;
      }
      std::size_t pick = rng.categorical(weights);
      if (pick == 0)
        labels.emplace_back();
      else
        labels.emplace_back(candidates[pick - 1]);
    }
  }
  return spec;
}

HierarchySpec sample_rw_hierarchy(Rng& rng, const RandomWalkConfig& cfg, const PropSet& allowed) {
  check_config(cfg);
  HierarchyTree tree = sample_hierarchy_structure(rng, cfg.hierarchy_size, cfg.partition_weights);
  HierarchySpec spec;
  spec.num_nodes = tree.num_nodes;
  spec.tree_edges = tree.edges;
  for (int node = 0; node < tree.num_nodes; ++node) {
    std::optional<RewardMachine> machine;
    for (int attempt = 0; attempt < kRetryBudget && !machine; ++attempt) {
      try {
        auto graph = sample_rw_structure(rng, cfg, node == 0);
        machine = label_rm_propositions(std::move(graph), rng, allowed, cfg.proposition_prior);
      } catch (const SamplingError&) {
      }
    }
    if (!machine) throw SamplingError("proposition labeling failed after retries");
    spec.machines.push_back(assign_rewards(std::move(*machine), cfg.reward));
  }
  return label_rm_calls(std::move(spec), rng, cfg.call_top_weight);
}

RewardMachine sample_task(Rng& rng, const TaskSamplerConfig& cfg, const PropSet& allowed) {
  if (cfg.structure == RmStructure::sequential)
    return sample_sequential_rm(rng, cfg.sequential, &allowed);
  RandomWalkConfig rw = cfg.random_walk;
  rw.structure = cfg.structure;
  rw.hierarchy_size = 1;
  return sample_rw_hierarchy(rng, rw, allowed).flatten();
}

PropSet level_allowed_propositions(const Level& level) {
  const Alphabet& alphabet = Alphabet::instance();
  std::vector<int> objects;
  for (Pos p : level.object_positions()) objects.push_back(descriptor_index(*level.object_at(p)));
  if (level.carried) objects.push_back(descriptor_index(*level.carried));
  PropSet out;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    out |= alphabet.generalizations(*alphabet.front(objects[i]));
    if (auto c = alphabet.carrying(objects[i])) out |= alphabet.generalizations(*c);
    for (std::size_t j = i + 1; j < objects.size(); ++j)
      if (auto n = alphabet.next(objects[i], objects[j])) out |= alphabet.generalizations(*n);
  }
  return out;
}

Level sample_level_for_task(Rng& rng, const LevelSamplerConfig& cfg, const RewardMachine& rm) {
  const Alphabet& alphabet = Alphabet::instance();
  std::vector<ObjectDescriptor> door_reqs;
  std::vector<ObjectDescriptor> other_reqs;
  for (const RmEdge& e : rm.edges) {
    const Proposition& p = alphabet.at(e.formula.positive);
    auto add = [&](const ObjectDescriptor& d) { (d.is_door() ? door_reqs : other_reqs).push_back(d); };
    add(p.first);
    if (p.second) add(*p.second);
  }
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    int rooms = rng.pick(cfg.room_choices);
    ObjectRange range = effective_range(cfg, rooms);
    int doors = door_count(rooms);
    if (static_cast<int>(door_reqs.size()) > doors) continue;
    int required = doors + static_cast<int>(other_reqs.size());
    if (required > range.max) continue;
    int count = std::max(rng.uniform_int(range.min, range.max), required);

    std::vector<ObjectDescriptor> door_objects;
    for (int i = 0; i < doors; ++i) door_objects.push_back(random_door(rng));
    std::vector<std::size_t> slots(static_cast<std::size_t>(doors));
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    rng.shuffle(slots);
    for (std::size_t i = 0; i < door_reqs.size(); ++i)
      door_objects[slots[i]] = instantiate(rng, door_reqs[i]);

    std::vector<ObjectDescriptor> non_doors;
    for (const ObjectDescriptor& d : other_reqs) non_doors.push_back(instantiate(rng, d));
    while (static_cast<int>(non_doors.size()) + doors < count) non_doors.push_back(random_non_door(rng));
    return build_level(rng, rooms, door_objects, non_doors);
  }
  throw SamplingError("no level can host the objects the task requires");
}

Problem sample_problem(Rng& rng, ProblemMode mode, const LevelSamplerConfig& level_cfg,
                       const TaskSamplerConfig& task_cfg) {
  check_config(level_cfg);
  Rng level_rng(rng.next_u64());
  Rng task_rng(rng.next_u64());
  const PropSet full = all_propositions();
  switch (mode) {
    case ProblemMode::independent: {
      Level level = sample_level(level_rng, level_cfg);
      RewardMachine rm = sample_task(task_rng, task_cfg, full);
      return {std::move(rm), std::move(level)};
    }
    case ProblemMode::level_conditioned: {
      for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
        Level level = sample_level(level_rng, level_cfg);
        try {
          RewardMachine rm = sample_task(task_rng, task_cfg, level_allowed_propositions(level));
          return {std::move(rm), std::move(level)};
        } catch (const SamplingError&) {
        }
      }
      throw SamplingError("level-conditioned sampling failed after retries");
    }
    case ProblemMode::task_conditioned: {
      RewardMachine rm = sample_task(task_rng, task_cfg, full);
      Level level = sample_level_for_task(level_rng, level_cfg, rm);
      return {std::move(rm), std::move(level)};
    }
  }
  throw ConfigError("unknown problem mode");
}

}  // namespace rmued

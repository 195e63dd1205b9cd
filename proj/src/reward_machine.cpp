#include "rmued/reward_machine.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

namespace rmued {

bool Formula::satisfied_by(const PropSet& label) const {
  const Alphabet& alphabet = Alphabet::instance();
  if ((label & alphabet.specializations(positive)).none()) return false;
  for (PropId n : negatives)
    if ((label & alphabet.specializations(n)).any()) return false;
  return true;
}

std::vector<const RmEdge*> RewardMachine::outgoing(RmState u) const {
  std::vector<const RmEdge*> out;
  for (const RmEdge& e : edges)
    if (e.source == u) out.push_back(&e);
  return out;
}

const RmEdge* RewardMachine::find_edge(RmState source, RmState target) const {
  for (const RmEdge& e : edges)
    if (e.source == source && e.target == target) return &e;
  return nullptr;
}

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::sparse: return "sparse";
    case RewardKind::stepwise: return "stepwise";
    case RewardKind::distance_shaped: return "distance_shaped";
  }
  return "sparse";
}

std::optional<RewardKind> parse_reward_kind(std::string_view s) {
  if (s == "sparse") return RewardKind::sparse;
  if (s == "stepwise") return RewardKind::stepwise;
  if (s == "distance_shaped") return RewardKind::distance_shaped;
  return std::nullopt;
}

StepResult rm_step(const RewardMachine& rm, RmState u, const PropSet& label) {
  if (u < 0 || u >= rm.num_states) throw StructuralError("rm_step: state out of range");
  const RmEdge* fired = nullptr;
  for (const RmEdge& e : rm.edges) {
    if (e.source != u || !e.formula.satisfied_by(label)) continue;
    if (fired) throw StructuralError("rm_step: more than one transition fired (nondeterministic)");
    fired = &e;
  }
  if (!fired) return {u, 0.0};
  return {fired->target, fired->reward};
}

std::vector<int> distances_to_accepting(const RewardMachine& rm) {
  std::vector<int> dist(static_cast<std::size_t>(rm.num_states), -1);
  std::deque<RmState> queue{rm.accepting};
  dist[static_cast<std::size_t>(rm.accepting)] = 0;
  while (!queue.empty()) {
    RmState v = queue.front();
    queue.pop_front();
    for (const RmEdge& e : rm.edges) {
      if (e.target != v || dist[static_cast<std::size_t>(e.source)] >= 0) continue;
      dist[static_cast<std::size_t>(e.source)] = dist[static_cast<std::size_t>(v)] + 1;
      queue.push_back(e.source);
    }
  }
  return dist;
}

RewardMachine assign_rewards(RewardMachine rm, RewardKind kind) {
  switch (kind) {
    case RewardKind::sparse:
      for (RmEdge& e : rm.edges) e.reward = e.target == rm.accepting ? 1.0 : 0.0;
      break;
    case RewardKind::stepwise:
      for (RmEdge& e : rm.edges) e.reward = e.target != e.source ? 1.0 : 0.0;
      break;
    case RewardKind::distance_shaped: {
      auto dist = distances_to_accepting(rm);
      for (int d : dist)
        if (d < 0)
          throw StructuralError("assign_rewards: accepting state unreachable from some state");
      const double total = dist[static_cast<std::size_t>(rm.initial)];
      auto potential = [&](RmState x) {
        return total > 0 ? 1.0 - dist[static_cast<std::size_t>(x)] / total : 1.0;
      };
      for (RmEdge& e : rm.edges) e.reward = potential(e.target) - potential(e.source);
      break;
    }
  }
  return rm;
}

bool check_determinism(const RewardMachine& rm) {
  for (RmState u = 0; u < rm.num_states; ++u) {
    auto out = rm.outgoing(u);
    std::set<PropId> positives;
    for (const RmEdge* e : out)
      if (!positives.insert(e->formula.positive).second) return false;
    for (const RmEdge* e : out) {
      std::set<PropId> expected = positives;
      expected.erase(e->formula.positive);
      std::set<PropId> actual(e->formula.negatives.begin(), e->formula.negatives.end());
      if (actual.size() != e->formula.negatives.size() || actual != expected) return false;
    }
  }
  return true;
}

void recompute_negations(RewardMachine& rm) {
  for (RmEdge& e : rm.edges) {
    e.formula.negatives.clear();
    for (const RmEdge& s : rm.edges)
      if (s.source == e.source && &s != &e) e.formula.negatives.push_back(s.formula.positive);
    std::sort(e.formula.negatives.begin(), e.formula.negatives.end());
  }
}

std::string structural_problem(const RewardMachine& rm) {
  if (rm.num_states < 2) return "fewer than two states";
  auto in_range = [&](RmState s) { return s >= 0 && s < rm.num_states; };
  if (!in_range(rm.initial) || !in_range(rm.accepting)) return "initial/accepting out of range";
  if (rm.initial == rm.accepting) return "initial state equals accepting state";
  std::set<std::pair<RmState, RmState>> pairs;
  for (const RmEdge& e : rm.edges) {
    if (!in_range(e.source) || !in_range(e.target)) return "edge endpoint out of range";
    if (e.source == e.target) return "explicit self-loop";
    if (e.source == rm.accepting) return "accepting state has an outgoing edge";
    if (to_index(e.formula.positive) >= kAlphabetSize) return "proposition out of range";
    if (std::find(e.formula.negatives.begin(), e.formula.negatives.end(), e.formula.positive) !=
        e.formula.negatives.end())
      return "positive proposition also negated";
    if (!pairs.insert({e.source, e.target}).second) return "duplicate edge between state pair";
  }
  if (!check_determinism(rm)) return "nondeterministic transitions";
  return {};
}

void validate(const RewardMachine& rm) {
  if (auto problem = structural_problem(rm); !problem.empty())
    throw StructuralError("invalid reward machine: " + problem);
}

std::vector<RmPath> enumerate_paths(const RewardMachine& rm, std::optional<RmState> from) {
  std::vector<RmPath> out;
  const RmState start = from.value_or(rm.initial);
  std::vector<std::vector<const RmEdge*>> adjacency(static_cast<std::size_t>(rm.num_states));
  for (const RmEdge& e : rm.edges) adjacency[static_cast<std::size_t>(e.source)].push_back(&e);
  for (auto& list : adjacency)
    std::sort(list.begin(), list.end(),
              [](const RmEdge* a, const RmEdge* b) { return a->target < b->target; });

  std::vector<bool> on_path(static_cast<std::size_t>(rm.num_states), false);
  RmPath current;
  std::function<void(RmState)> dfs = [&](RmState u) {
    if (u == rm.accepting) {
      out.push_back(current);
      return;
    }
    on_path[static_cast<std::size_t>(u)] = true;
    for (const RmEdge* e : adjacency[static_cast<std::size_t>(u)]) {
      if (on_path[static_cast<std::size_t>(e->target)]) continue;
      current.push_back(*e);
      dfs(e->target);
      current.pop_back();
    }
    on_path[static_cast<std::size_t>(u)] = false;
  };
  dfs(start);
  return out;
}

namespace {

std::optional<std::vector<RmState>> topological_order(const RewardMachine& rm) {
  std::vector<int> indegree(static_cast<std::size_t>(rm.num_states), 0);
  for (const RmEdge& e : rm.edges) ++indegree[static_cast<std::size_t>(e.target)];
  std::deque<RmState> ready;
  for (RmState u = 0; u < rm.num_states; ++u)
    if (indegree[static_cast<std::size_t>(u)] == 0) ready.push_back(u);
  std::vector<RmState> order;
  while (!ready.empty()) {
    RmState u = ready.front();
    ready.pop_front();
    order.push_back(u);
    for (const RmEdge& e : rm.edges)
      if (e.source == u && --indegree[static_cast<std::size_t>(e.target)] == 0)
        ready.push_back(e.target);
  }
  if (static_cast<int>(order.size()) != rm.num_states) return std::nullopt;
  return order;
}

}  // namespace

bool is_acyclic(const RewardMachine& rm) { return topological_order(rm).has_value(); }

PathMetrics path_metrics(const RewardMachine& rm) {
  auto order = topological_order(rm);
  if (!order) throw StructuralError("path_metrics: reward machine is cyclic");
  const auto n = static_cast<std::size_t>(rm.num_states);
  std::vector<long long> count(n, 0);
  std::vector<long long> length_sum(n, 0);
  count[static_cast<std::size_t>(rm.initial)] = 1;
  for (RmState u : *order) {
    const auto ui = static_cast<std::size_t>(u);
    if (count[ui] == 0) continue;
    for (const RmEdge& e : rm.edges) {
      if (e.source != u) continue;
      const auto vi = static_cast<std::size_t>(e.target);
      count[vi] += count[ui];
      length_sum[vi] += length_sum[ui] + count[ui];
    }
  }
  PathMetrics m;
  m.num_paths = count[static_cast<std::size_t>(rm.accepting)];
  if (m.num_paths > 0)
    m.avg_path_length = static_cast<double>(length_sum[static_cast<std::size_t>(rm.accepting)]) /
                        static_cast<double>(m.num_paths);
  return m;
}

RewardMachine prune_and_canonicalize(const RewardMachine& rm) {
  const auto n = static_cast<std::size_t>(rm.num_states);
  std::vector<bool> from_initial(n, false), to_accepting(n, false);
  std::deque<RmState> queue{rm.initial};
  from_initial[static_cast<std::size_t>(rm.initial)] = true;
  while (!queue.empty()) {
    RmState u = queue.front();
    queue.pop_front();
    for (const RmEdge& e : rm.edges)
      if (e.source == u && !from_initial[static_cast<std::size_t>(e.target)]) {
        from_initial[static_cast<std::size_t>(e.target)] = true;
        queue.push_back(e.target);
      }
  }
  auto dist = distances_to_accepting(rm);
  for (std::size_t i = 0; i < n; ++i) to_accepting[i] = dist[i] >= 0;

  std::vector<int> remap(n, -1);
  int next = 0;
  remap[static_cast<std::size_t>(rm.initial)] = next++;
  for (std::size_t i = 0; i < n; ++i) {
    auto s = static_cast<RmState>(i);
    if (s == rm.initial || s == rm.accepting) continue;
    if (from_initial[i] && to_accepting[i]) remap[i] = next++;
  }
  remap[static_cast<std::size_t>(rm.accepting)] = next++;

  RewardMachine out;
  out.num_states = next;
  out.initial = 0;
  out.accepting = next - 1;
  for (const RmEdge& e : rm.edges) {
    int s = remap[static_cast<std::size_t>(e.source)];
    int t = remap[static_cast<std::size_t>(e.target)];
    if (s < 0 || t < 0 || e.source == rm.accepting) continue;
    RmEdge copy = e;
    copy.source = s;
    copy.target = t;
    out.edges.push_back(copy);
  }
  std::stable_sort(out.edges.begin(), out.edges.end(), [](const RmEdge& a, const RmEdge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  recompute_negations(out);
  return out;
}

PolicyGraph export_policy_graph(const RewardMachine& rm, std::optional<RmState> current) {
  PolicyGraph g;
  g.num_nodes = rm.num_states;
  g.current_state = current;
  for (const RmEdge& e : rm.edges) {
    g.reversed_edges.emplace_back(e.target, e.source);
    std::vector<LiteralFeatures> features;
    features.push_back(decompose_literal({e.formula.positive, Sign::positive}));
    for (PropId n : e.formula.negatives) features.push_back(decompose_literal({n, Sign::negative}));
    g.edge_features.push_back(std::move(features));
  }
  return g;
}

std::vector<int> HierarchySpec::children(int node) const {
  std::vector<int> out;
  for (auto [parent, child] : tree_edges)
    if (parent == node) out.push_back(child);
  return out;
}

const RewardMachine& HierarchySpec::flatten() const {
  for (const auto& labels : call_labels)
    for (const auto& call : labels)
      if (call) throw StructuralError("hierarchy contains calls; only flat machines execute");
  if (machines.empty()) throw StructuralError("hierarchy has no machines");
  return machines.front();
}

}  // namespace rmued

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmued/alphabet.hpp"

namespace rmued {

/// Raised when a reward machine violates its structural invariants.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RmState = int;

/// A positive proposition conjoined with the negations of its siblings.
struct Formula {
  PropId positive{};
  std::vector<PropId> negatives;

  friend bool operator==(const Formula&, const Formula&) = default;

  /// Satisfaction by implication: some member of `label` implies the
  /// positive proposition and no member implies any negated one.
  bool satisfied_by(const PropSet& label) const;
};

struct RmEdge {
  RmState source = 0;
  RmState target = 0;
  Formula formula;
  double reward = 0.0;

  friend bool operator==(const RmEdge&, const RmEdge&) = default;
};

/// Flat reward machine over the canonical alphabet. States are 0..n-1.
/// Unmatched labels are implicit zero-reward self-loops.
struct RewardMachine {
  int num_states = 2;
  RmState initial = 0;
  RmState accepting = 1;
  std::vector<RmEdge> edges;

  friend bool operator==(const RewardMachine&, const RewardMachine&) = default;

  std::vector<const RmEdge*> outgoing(RmState u) const;
  const RmEdge* find_edge(RmState source, RmState target) const;
};

enum class RewardKind { sparse, stepwise, distance_shaped };
std::string_view to_string(RewardKind kind);
std::optional<RewardKind> parse_reward_kind(std::string_view s);

struct StepResult {
  RmState state = 0;
  double reward = 0.0;
  friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// Advances the machine on a label. Throws StructuralError if more than one
/// outgoing formula fires.
StepResult rm_step(const RewardMachine& rm, RmState u, const PropSet& label);

RewardMachine assign_rewards(RewardMachine rm, RewardKind kind);

/// Determinism: per state, positives are pairwise distinct and each edge's
/// negatives are exactly its siblings' positives.
bool check_determinism(const RewardMachine& rm);

/// Recomputes sibling negations from the positives.
void recompute_negations(RewardMachine& rm);

/// Empty string when valid; otherwise a description of the first violation.
/// Checks indices, single edge per ordered pair, accepting without outgoing
/// edges, u0 != uA and determinism.
std::string structural_problem(const RewardMachine& rm);
void validate(const RewardMachine& rm);

using RmPath = std::vector<RmEdge>;

/// All simple paths from `from` (default: initial) to the accepting state,
/// ordered lexicographically by visited state indices.
std::vector<RmPath> enumerate_paths(const RewardMachine& rm, std::optional<RmState> from = {});

bool is_acyclic(const RewardMachine& rm);

struct PathMetrics {
  long long num_paths = 0;
  double avg_path_length = 0.0;
};

/// Path count and mean path length by dynamic programming over a
/// topological order. Throws StructuralError on cyclic machines.
PathMetrics path_metrics(const RewardMachine& rm);

/// Shortest path length in edges from every state to the accepting state;
/// -1 where unreachable.
std::vector<int> distances_to_accepting(const RewardMachine& rm);

/// Renumbers states so that initial = 0, accepting = n-1 and the rest keep
/// their relative order. States not on any initial-to-accepting path are
/// removed along with their edges.
RewardMachine prune_and_canonicalize(const RewardMachine& rm);

/// Graph handed to policy-conditioning consumers: edges reversed, each
/// carrying the decomposed literals of its formula.
struct PolicyGraph {
  int num_nodes = 0;
  std::vector<std::pair<RmState, RmState>> reversed_edges;  // (target, source)
  std::vector<std::vector<LiteralFeatures>> edge_features;
  std::optional<RmState> current_state;
};

PolicyGraph export_policy_graph(const RewardMachine& rm,
                                std::optional<RmState> current = std::nullopt);

/// Hierarchy produced by the random-walk sampler. Only flat machines execute.
struct HierarchySpec {
  int num_nodes = 1;
  std::vector<std::pair<int, int>> tree_edges;  // (parent, child)
  std::vector<RewardMachine> machines;          // per node; node 0 is the root
  std::vector<std::vector<std::optional<int>>> call_labels;  // per node, per edge

  std::vector<int> children(int node) const;
  /// The root machine, when no edge carries a call. Throws otherwise.
  const RewardMachine& flatten() const;
};

}  // namespace rmued

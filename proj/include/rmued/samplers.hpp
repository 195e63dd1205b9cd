#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rmued/problem.hpp"
#include "rmued/rng.hpp"

namespace rmued {

/// Raised when a sampler cannot satisfy its constraints within its retry
/// budget, or when a masked categorical draw has no admissible outcome.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid sampler configurations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LevelSamplerConfig {
  std::vector<int> room_choices{1, 2, 4, 6};
  /// Overrides the room-dependent object range (clamped to it).
  std::optional<ObjectRange> object_count;
};

void check_config(const LevelSamplerConfig& cfg);
Level sample_level(Rng& rng, const LevelSamplerConfig& cfg);

enum class RmStructure { sequential, dag, cyclic };
std::string_view to_string(RmStructure s);
std::optional<RmStructure> parse_rm_structure(std::string_view s);

struct SequentialRmConfig {
  int min_length = 1;
  int max_length = 5;
  RewardKind reward = RewardKind::sparse;
};

struct RandomWalkConfig {
  int num_states = 7;
  RmStructure structure = RmStructure::dag;
  /// Average connectivity k̄; a walk is capped at k̄ * num_states steps.
  double connectivity = 1.0;
  /// Probability of starting another walk after a completed one.
  double restart = 0.3;
  /// Walks that would push the u0-to-uA path count above this are dropped
  /// (acyclic structures only; 0 disables the cap).
  int max_paths = 2;
  /// Number of machines in the hierarchy; 1 yields a flat machine.
  int hierarchy_size = 1;
  /// Weights over the ordered integer partitions of hierarchy_size / 2;
  /// empty means uniform.
  std::vector<double> partition_weights;
  /// Proposition prior over the alphabet; empty means uniform.
  std::vector<double> proposition_prior;
  /// Weight of the no-call option relative to each callable child (weight 1).
  double call_top_weight = 1.0;
  RewardKind reward = RewardKind::sparse;
};

void check_config(const RandomWalkConfig& cfg);

struct TaskSamplerConfig {
  RmStructure structure = RmStructure::sequential;
  SequentialRmConfig sequential;
  RandomWalkConfig random_walk;
};

/// Uniform chain length; positives uniform over `allowed` (default: all).
RewardMachine sample_sequential_rm(Rng& rng, const SequentialRmConfig& cfg,
                                   const PropSet* allowed = nullptr);

/// Ordered integer partitions of n (compositions), largest first part first.
std::vector<std::vector<int>> ordered_partitions(int n);

struct HierarchyTree {
  int num_nodes = 1;
  std::vector<std::pair<int, int>> edges;  // (parent, child)
};

/// Draws a composition of floor(m/2); the i-th summand is the child count of
/// node i, children taking the next unused node ids. Nodes left over are
/// attached as a chain below the last node.
HierarchyTree sample_hierarchy_structure(Rng& rng, int m, const std::vector<double>& weights);

/// Unlabeled reward machine graph from random walks over a masked random
/// transition matrix. States are relabeled so that initial = 0 and
/// accepting = n-1. `root` = false forces a single initial transition 0 -> 1.
RewardMachine sample_rw_structure(Rng& rng, const RandomWalkConfig& cfg, bool root = true);

/// Assigns positive propositions edge by edge under the tautology, sibling
/// and allowed-set masks, then conjoins sibling negations. Throws
/// SamplingError when some mask empties.
RewardMachine label_rm_propositions(RewardMachine graph, Rng& rng, const PropSet& allowed,
                                    const std::vector<double>& prior = {});

/// Assigns call labels: each edge of machine i calls no machine or a child
/// of i whose initial-transition proposition is compatible with the edge's.
HierarchySpec label_rm_calls(HierarchySpec spec, Rng& rng, double top_weight = 1.0);

/// Full random-walk sampler: hierarchy, per-node structure and labeling, call
/// labels, rewards. Retries labeling failures up to 20 times.
HierarchySpec sample_rw_hierarchy(Rng& rng, const RandomWalkConfig& cfg, const PropSet& allowed);

/// Flat task from the configured structure.
RewardMachine sample_task(Rng& rng, const TaskSamplerConfig& cfg, const PropSet& allowed);

enum class ProblemMode { independent, level_conditioned, task_conditioned };
std::string_view to_string(ProblemMode m);
std::optional<ProblemMode> parse_problem_mode(std::string_view s);

/// Every proposition that some object, or pair of distinct objects for next,
/// in the level can satisfy. Carried objects count.
PropSet level_allowed_propositions(const Level& level);

/// A level holding, for every edge positive, objects that can satisfy it;
/// door requirements take distinct doors. Throws SamplingError when the
/// configured room counts cannot host them.
Level sample_level_for_task(Rng& rng, const LevelSamplerConfig& cfg, const RewardMachine& rm);

/// Level and task are drawn from independent sub-streams of `rng`, so in
/// independent mode the task does not depend on the level configuration.
Problem sample_problem(Rng& rng, ProblemMode mode, const LevelSamplerConfig& level_cfg,
                       const TaskSamplerConfig& task_cfg);

Color random_color(Rng& rng);
/// Uniform color and state.
ObjectDescriptor random_door(Rng& rng);
/// Uniform kind among ball, square and key, uniform color.
ObjectDescriptor random_non_door(Rng& rng);

/// Full alphabet as a PropSet.
PropSet all_propositions();

}  // namespace rmued

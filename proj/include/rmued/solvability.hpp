#pragma once

#include <cstdint>
#include <vector>

#include "rmued/problem.hpp"
#include "rmued/samplers.hpp"

namespace rmued {

struct ReachableObject {
  Pos pos;
  ObjectDescriptor descriptor;
  bool carried = false;
  /// Locked door opened in this branch of the reachability tree.
  bool opened = false;
};

struct ReachabilityNode {
  std::vector<Pos> opened_doors;
  std::vector<bool> reachable_cells;  // row-major over the level
  std::vector<ReachableObject> reachable_objects;

  bool reachable(const Level& level, Pos p) const {
    return level.in_bounds(p) &&
           reachable_cells[static_cast<std::size_t>(p.y * level.width() + p.x)];
  }
};

/// Flood fill from the agent. Floor cells, unlocked doors and doors in
/// `opened` are passable; objects do not block. Reachable objects are the
/// objects on reachable cells, locked doors bordering the region and the
/// carried object.
ReachabilityNode reachable_set(const Level& level, const std::vector<Pos>& opened);

/// Whether a pattern can match an object once the agent may toggle it:
/// unlocked or opened doors match open and closed, unopened locked doors
/// match locked only.
bool pattern_matches(const ObjectDescriptor& pattern, const ReachableObject& object);

/// Static satisfiability of one proposition at a reachability node.
bool proposition_satisfiable(const Level& level, const ReachabilityNode& node, PropId p);

/// Some simple initial-to-accepting path has all its positive propositions
/// satisfiable in order under some sequence of door openings. Negative
/// literals are ignored.
bool is_solvable_static(const Problem& problem);

enum class ExactResult { solvable, unsolvable, indeterminate };

struct ExactOptions {
  int step_limit = 512;
  std::size_t state_budget = 2'000'000;
  ObservationOptions observation;
};

/// Breadth-first search over (physical state, RM state) under the six actions
/// with the rollout's step semantics (the initial label is applied before the
/// first action). Edges whose positive proposition no object in the level
/// could ever produce are removed first, which leaves the answer unchanged.
ExactResult is_solvable_exact(const Problem& problem, const ExactOptions& options = {});

struct SolvabilityRate {
  double mean = 0.0;    // percent
  double stddev = 0.0;  // percent, population over batches
  std::vector<double> batch_rates;
};

/// Fraction (percent) of statically solvable problems per batch. Problem i of
/// batch b is drawn from its own stream, so results do not depend on `jobs`.
SolvabilityRate batch_solvability_rate(std::uint64_t seed, ProblemMode mode,
                                       const LevelSamplerConfig& level_cfg,
                                       const TaskSamplerConfig& task_cfg, int batches = 5,
                                       int batch_size = 4096, int jobs = 1);

}  // namespace rmued

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rmued/mutations.hpp"
#include "rmued/problem.hpp"
#include "rmued/samplers.hpp"
#include "rmued/students.hpp"

namespace rmued {

enum class Algorithm { dr, plr_robust, accel, accel0 };
enum class ScoreFn { maxmc, pvl };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view s);
std::string_view to_string(ScoreFn s);
std::optional<ScoreFn> parse_score_fn(std::string_view s);

/// Where fresh problems come from.
struct GeneratorConfig {
  ProblemMode mode = ProblemMode::independent;
  LevelSamplerConfig level;
  TaskSamplerConfig task;
};

struct CurriculumConfig {
  Algorithm algorithm = Algorithm::plr_robust;
  int buffer_capacity = 50000;
  /// Negative means the algorithm default: 0.5, 0.9 or 0.99.
  double replay_rate = -1.0;
  double temperature = 1.0;
  double staleness_coef = 0.1;
  ScoreFn score_fn = ScoreFn::maxmc;
  /// Weight of the previous score when a replay updates it; 0 replaces.
  double score_momentum = 0.0;
  MutationConfig mutation;
  int horizon = 512;
  double gamma = 0.99;
  double lambda = 0.9;
  GeneratorConfig generator;
  int episodes_per_step = 256;
  /// Compute the static solvability hint of inserted problems.
  bool solvable_hint = true;
  ObservationOptions observation;
};

double default_replay_rate(Algorithm a);
double effective_replay_rate(const CurriculumConfig& cfg);
/// Throws ConfigError on out-of-range values.
void check_config(const CurriculumConfig& cfg);

/// (1/length) * sum_t (r_max - value_t), floored at 0; 0 for empty rollouts.
double score_maxmc(const RolloutSummary& summary, double r_max);
/// Mean positive GAE with a zero terminal bootstrap; 0 for empty rollouts.
double score_pvl(const RolloutSummary& summary, double gamma, double lambda);

struct BufferEntry {
  Problem problem;
  double score = 0.0;
  /// Highest undiscounted return observed on this problem.
  double r_max = 0.0;
  std::int64_t insert_step = 0;
  std::int64_t last_sampled_step = 0;
  /// Insertion counter; breaks ties between entries inserted in one step.
  std::uint64_t seq = 0;
  /// Every edit applied since the generated ancestor, oldest first; empty
  /// for generated problems.
  std::vector<Edit> lineage;
  /// Size of the last mutation (edits from the immediate parent).
  int parent_edits = 0;
  std::optional<bool> solvable_hint;
};

struct Buffer {
  std::vector<BufferEntry> entries;
  std::uint64_t next_seq = 0;
};

/// (1 - rho) * P_score + rho * P_stale. P_score follows (1/rank)^(1/T) with
/// ranks by descending score, ties going to the older insert. P_stale is
/// proportional to steps since the last replay (uniform when all are zero).
std::vector<double> replay_distribution(const Buffer& buffer, const CurriculumConfig& cfg,
                                        std::int64_t global_step);

enum class InsertOutcome { inserted, inserted_with_eviction, rejected };

/// Below capacity the entry is appended. At capacity it replaces the
/// minimum-score entry (ties: stalest, then oldest) if its score is
/// strictly higher.
InsertOutcome buffer_insert(Buffer& buffer, BufferEntry entry, const CurriculumConfig& cfg);

struct BufferStats {
  std::size_t size = 0;
  double mean_states = 0.0;
  double mean_rooms = 0.0;
  double mean_objects = 0.0;
  /// Lineage length.
  double mean_edits = 0.0;
  double mean_parent_edits = 0.0;
  /// Weighted mean count of each edit kind in the last mutation.
  std::vector<double> edit_kind_frequency;
  /// Among entries with a hint.
  double solvable_fraction = 0.0;
  double mean_score = 0.0;
  /// Over acyclic machines only.
  double mean_num_paths = 0.0;
  double mean_avg_path_length = 0.0;
};

/// Replay-probability-weighted means. Throws std::invalid_argument on an
/// empty buffer.
BufferStats buffer_stats(const Buffer& buffer, const CurriculumConfig& cfg,
                         std::int64_t global_step);
nlohmann::ordered_json to_json(const BufferStats& stats);

/// Single-writer loop state. All randomness derives from the root seed and
/// the step counter, so the state is fully captured by these fields.
struct CurriculumState {
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  Buffer buffer;
};

/// Problem the generator would emit for (step, slot).
Problem generate_problem(const CurriculumConfig& cfg, std::uint64_t seed, std::int64_t step,
                         std::size_t slot);

struct StepReport {
  std::vector<Problem> training_batch;
  std::vector<RolloutSummary> training_summaries;
  int replayed = 0;
  int generated = 0;
  int mutated = 0;
  int inserted = 0;
  int evicted = 0;
  nlohmann::ordered_json event;
};

/// One iteration of the loop. Rollouts run on `jobs` threads; the buffer is
/// updated afterwards in slot order.
StepReport ued_step(CurriculumState& state, const StudentFactory& student,
                    const CurriculumConfig& cfg, int jobs = 1);

nlohmann::ordered_json to_json(const BufferEntry& entry);
BufferEntry buffer_entry_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const CurriculumState& state);
CurriculumState curriculum_state_from_json(const nlohmann::ordered_json& j);

}  // namespace rmued

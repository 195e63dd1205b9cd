#include "rmued/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rmued/parallel.hpp"
#include "rmued/serialization.hpp"
#include "rmued/solvability.hpp"

namespace rmued {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dr: return "DR";
    case Algorithm::plr_robust: return "PLR_robust";
    case Algorithm::accel: return "ACCEL";
    case Algorithm::accel0: return "ACCEL0";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::dr, Algorithm::plr_robust, Algorithm::accel, Algorithm::accel0})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

std::string_view to_string(ScoreFn s) { return s == ScoreFn::maxmc ? "MaxMC" : "PVL"; }

std::optional<ScoreFn> parse_score_fn(std::string_view s) {
  if (s == "MaxMC") return ScoreFn::maxmc;
  if (s == "PVL") return ScoreFn::pvl;
  return std::nullopt;
}

double default_replay_rate(Algorithm a) {
  switch (a) {
    case Algorithm::dr: return 0.0;
    case Algorithm::plr_robust: return 0.5;
    case Algorithm::accel: return 0.9;
    case Algorithm::accel0: return 0.99;
  }
  return 0.0;
}

double effective_replay_rate(const CurriculumConfig& cfg) {
  if (cfg.algorithm == Algorithm::dr) return 0.0;
  return cfg.replay_rate < 0.0 ? default_replay_rate(cfg.algorithm) : cfg.replay_rate;
}

void check_config(const CurriculumConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(cfg.buffer_capacity >= 1, "buffer_capacity must be at least 1");
  require(cfg.replay_rate < 0.0 || cfg.replay_rate <= 1.0, "replay_rate must lie in [0, 1]");
  require(cfg.temperature > 0.0, "temperature must be positive");
  require(cfg.staleness_coef >= 0.0 && cfg.staleness_coef <= 1.0,
          "staleness_coef must lie in [0, 1]");
  require(cfg.score_momentum >= 0.0 && cfg.score_momentum < 1.0,
          "score_momentum must lie in [0, 1)");
  require(cfg.mutation.min_edits >= 1 && cfg.mutation.min_edits <= cfg.mutation.max_edits,
          "edit range must satisfy 1 <= min_edits <= max_edits");
  require(cfg.mutation.max_states >= 2, "max_states must be at least 2");
  require(cfg.horizon >= 0, "horizon must be non-negative");
  require(cfg.gamma >= 0.0 && cfg.gamma <= 1.0, "gamma must lie in [0, 1]");
  require(cfg.lambda >= 0.0 && cfg.lambda <= 1.0, "lambda must lie in [0, 1]");
  require(cfg.episodes_per_step >= 1, "episodes_per_step must be at least 1");
  check_config(cfg.generator.level);
  if (cfg.generator.task.structure != RmStructure::sequential)
    check_config(cfg.generator.task.random_walk);
}

double score_maxmc(const RolloutSummary& summary, double r_max) {
  if (summary.values.empty()) return 0.0;
  double total = 0.0;
  for (double v : summary.values) total += r_max - v;
  return std::max(0.0, total / static_cast<double>(summary.values.size()));
}

double score_pvl(const RolloutSummary& summary, double gamma, double lambda) {
  const std::size_t n = summary.values.size();
  if (n == 0) return 0.0;
  double gae = 0.0;
  double total = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    double next = k + 1 < n ? summary.values[k + 1] : 0.0;
    double delta = summary.rewards[k] + gamma * next - summary.values[k];
    gae = delta + gamma * lambda * gae;
    total += std::max(gae, 0.0);
  }
  return total / static_cast<double>(n);
}

namespace {

// Indices sorted by descending score, older entries first among ties.
std::vector<std::size_t> score_order(const Buffer& buffer) {
  std::vector<std::size_t> order(buffer.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const BufferEntry& x = buffer.entries[a];
    const BufferEntry& y = buffer.entries[b];
    if (x.score != y.score) return x.score > y.score;
    if (x.insert_step != y.insert_step) return x.insert_step < y.insert_step;
    return x.seq < y.seq;
  });
  return order;
}

}  // namespace

std::vector<double> replay_distribution(const Buffer& buffer, const CurriculumConfig& cfg,
                                        std::int64_t global_step) {
  const std::size_t n = buffer.entries.size();
  if (n == 0) throw std::invalid_argument("replay_distribution on an empty buffer");
  std::vector<double> score_p(n);
  std::vector<std::size_t> order = score_order(buffer);
  double score_total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double w = std::pow(1.0 / static_cast<double>(r + 1), 1.0 / cfg.temperature);
    score_p[order[r]] = w;
    score_total += w;
  }
  std::vector<double> stale_p(n);
  double stale_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stale_p[i] = static_cast<double>(
        std::max<std::int64_t>(0, global_step - buffer.entries[i].last_sampled_step));
    stale_total += stale_p[i];
  }
  const double rho = cfg.staleness_coef;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    double stale = stale_total > 0.0 ? stale_p[i] / stale_total : 1.0 / static_cast<double>(n);
    p[i] = (1.0 - rho) * score_p[i] / score_total + rho * stale;
  }
  return p;
}

InsertOutcome buffer_insert(Buffer& buffer, BufferEntry entry, const CurriculumConfig& cfg) {
  entry.seq = buffer.next_seq++;
  if (buffer.entries.size() < static_cast<std::size_t>(cfg.buffer_capacity)) {
    buffer.entries.push_back(std::move(entry));
    return InsertOutcome::inserted;
  }
  auto victim = std::min_element(
      buffer.entries.begin(), buffer.entries.end(), [](const BufferEntry& a, const BufferEntry& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.last_sampled_step != b.last_sampled_step)
          return a.last_sampled_step < b.last_sampled_step;
        return a.seq < b.seq;
      });
  if (!(entry.score > victim->score)) return InsertOutcome::rejected;
  *victim = std::move(entry);
  return InsertOutcome::inserted_with_eviction;
}

BufferStats buffer_stats(const Buffer& buffer, const CurriculumConfig& cfg,
                         std::int64_t global_step) {
  std::vector<double> p = replay_distribution(buffer, cfg, global_step);
  BufferStats s;
  s.size = buffer.entries.size();
  s.edit_kind_frequency.assign(kNumEditKinds, 0.0);
  double hint_weight = 0.0;
  double solvable_weight = 0.0;
  double dag_weight = 0.0;
  for (std::size_t i = 0; i < s.size; ++i) {
    const BufferEntry& e = buffer.entries[i];
    const double w = p[i];
    s.mean_states += w * e.problem.rm.num_states;
    s.mean_rooms += w * e.problem.level.rooms();
    s.mean_objects += w * e.problem.level.object_count();
    s.mean_edits += w * static_cast<double>(e.lineage.size());
    s.mean_parent_edits += w * e.parent_edits;
    s.mean_score += w * e.score;
    for (std::size_t k = e.lineage.size() - static_cast<std::size_t>(e.parent_edits);
         k < e.lineage.size(); ++k)
      s.edit_kind_frequency[static_cast<int>(e.lineage[k].kind)] += w;
    if (e.solvable_hint) {
      hint_weight += w;
      if (*e.solvable_hint) solvable_weight += w;
    }
    if (is_acyclic(e.problem.rm)) {
      PathMetrics m = path_metrics(e.problem.rm);
      dag_weight += w;
      s.mean_num_paths += w * static_cast<double>(m.num_paths);
      s.mean_avg_path_length += w * m.avg_path_length;
    }
  }
  s.solvable_fraction = hint_weight > 0.0 ? solvable_weight / hint_weight : 0.0;
  if (dag_weight > 0.0) {
    s.mean_num_paths /= dag_weight;
    s.mean_avg_path_length /= dag_weight;
  }
  return s;
}

Json to_json(const BufferStats& s) {
  Json kinds = Json::object();
  for (int k = 0; k < kNumEditKinds; ++k)
    kinds[std::string(to_string(static_cast<EditKind>(k)))] = s.edit_kind_frequency[k];
  return Json{{"size", s.size},
              {"mean_states", s.mean_states},
              {"mean_rooms", s.mean_rooms},
              {"mean_objects", s.mean_objects},
              {"mean_edits", s.mean_edits},
              {"mean_parent_edits", s.mean_parent_edits},
              {"edit_kind_frequency", kinds},
              {"solvable_fraction", s.solvable_fraction},
              {"mean_score", s.mean_score},
              {"mean_num_paths", s.mean_num_paths},
              {"mean_avg_path_length", s.mean_avg_path_length}};
}

Problem generate_problem(const CurriculumConfig& cfg, std::uint64_t seed, std::int64_t step,
                         std::size_t slot) {
  Rng rng = Rng::stream(seed, "sampler", static_cast<std::uint64_t>(step), slot);
  if (cfg.algorithm != Algorithm::accel0)
    return sample_problem(rng, cfg.generator.mode, cfg.generator.level, cfg.generator.task);
  LevelSamplerConfig level;
  level.room_choices = {1};
  level.object_count = ObjectRange{1, 1};
  TaskSamplerConfig task;
  task.structure = RmStructure::sequential;
  task.sequential.min_length = 1;
  task.sequential.max_length = 1;
  task.sequential.reward = cfg.generator.task.sequential.reward;
  return sample_problem(rng, cfg.generator.mode, level, task);
}

namespace {

struct Slot {
  bool replay = false;
  std::size_t entry = 0;  // buffer index when replaying
  Problem problem;
  Trajectory trajectory;
};

double score_of(const CurriculumConfig& cfg, const RolloutSummary& s, double r_max) {
  return cfg.score_fn == ScoreFn::maxmc ? score_maxmc(s, r_max)
                                        : score_pvl(s, cfg.gamma, cfg.lambda);
}

void run_rollouts(std::vector<Slot>& slots, const StudentFactory& student,
                  const CurriculumConfig& cfg, std::uint64_t seed, std::int64_t step,
                  std::string_view stream, int jobs) {
  RolloutOptions options;
  options.horizon = cfg.horizon;
  options.observation = cfg.observation;
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    std::unique_ptr<Student> s = student();
    std::uint64_t episode_seed =
        Rng::stream(seed, stream, static_cast<std::uint64_t>(step), i).next_u64();
    slots[i].trajectory = rollout(slots[i].problem, *s, episode_seed, options);
  });
}

BufferEntry new_entry(const CurriculumConfig& cfg, Problem problem, const RolloutSummary& s,
                      std::int64_t step, std::vector<Edit> lineage, int parent_edits) {
  BufferEntry e;
  e.r_max = std::max(0.0, s.undiscounted_return);
  e.score = score_of(cfg, s, e.r_max);
  e.insert_step = step;
  e.last_sampled_step = step;
  e.parent_edits = parent_edits;
  e.lineage = std::move(lineage);
  if (cfg.solvable_hint) e.solvable_hint = is_solvable_static(problem);
  e.problem = std::move(problem);
  return e;
}

}  // namespace

StepReport ued_step(CurriculumState& state, const StudentFactory& student,
                    const CurriculumConfig& cfg, int jobs) {
  check_config(cfg);
  const std::int64_t step = state.step;
  const auto ustep = static_cast<std::uint64_t>(step);
  const std::size_t n = static_cast<std::size_t>(cfg.episodes_per_step);
  const double p = effective_replay_rate(cfg);
  Buffer& buffer = state.buffer;

  std::vector<double> dist;
  if (!buffer.entries.empty() && cfg.algorithm != Algorithm::dr)
    dist = replay_distribution(buffer, cfg, step);

  std::vector<Slot> slots(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(state.seed, "replay", ustep, i);
    Slot& slot = slots[i];
    slot.replay = !dist.empty() && rng.bernoulli(p);
    if (slot.replay) {
      slot.entry = rng.categorical(dist);
      slot.problem = buffer.entries[slot.entry].problem;
    } else {
      slot.problem = generate_problem(cfg, state.seed, step, i);
    }
  }
  run_rollouts(slots, student, cfg, state.seed, step, "rollout", jobs);

  StepReport report;
  auto record_insert = [&](InsertOutcome o) {
    if (o != InsertOutcome::rejected) ++report.inserted;
    if (o == InsertOutcome::inserted_with_eviction) ++report.evicted;
  };

  // Mutants are built from the replayed problems before any insertion can
  // move buffer entries.
  std::vector<Slot> mutants;
  std::vector<std::vector<Edit>> mutant_lineage;
  std::vector<int> mutant_edits;
  for (std::size_t i = 0; i < n; ++i) {
    Slot& slot = slots[i];
    const RolloutSummary& s = slot.trajectory.summary;
    if (cfg.algorithm == Algorithm::dr || slot.replay) {
      report.training_batch.push_back(slot.problem);
      report.training_summaries.push_back(s);
    }
    if (cfg.algorithm == Algorithm::dr) {
      ++report.generated;
      continue;
    }
    if (!slot.replay) {
      ++report.generated;
      continue;
    }
    ++report.replayed;
    BufferEntry& e = buffer.entries[slot.entry];
    e.r_max = std::max(e.r_max, s.undiscounted_return);
    double fresh = score_of(cfg, s, e.r_max);
    e.score = cfg.score_momentum * e.score + (1.0 - cfg.score_momentum) * fresh;
    e.last_sampled_step = step;
    if (cfg.algorithm == Algorithm::accel || cfg.algorithm == Algorithm::accel0) {
      RolloutContext ctx{s.final_rm_state, slot.trajectory.final_level};
      Rng rng = Rng::stream(state.seed, "mutation", ustep, i);
      Mutation m = mutate(slot.problem, rng, &ctx, cfg.mutation);
      Slot child;
      child.problem = std::move(m.problem);
      mutants.push_back(std::move(child));
      std::vector<Edit> lineage = e.lineage;
      lineage.insert(lineage.end(), m.edits.begin(), m.edits.end());
      mutant_lineage.push_back(std::move(lineage));
      mutant_edits.push_back(static_cast<int>(m.edits.size()));
    }
  }

  if (cfg.algorithm != Algorithm::dr) {
    for (Slot& slot : slots) {
      if (slot.replay) continue;
      record_insert(buffer_insert(
          buffer, new_entry(cfg, std::move(slot.problem), slot.trajectory.summary, step, {}, 0), cfg));
    }
  }
  if (!mutants.empty()) {
    run_rollouts(mutants, student, cfg, state.seed, step, "mutant_rollout", jobs);
    for (std::size_t i = 0; i < mutants.size(); ++i) {
      ++report.mutated;
      record_insert(buffer_insert(buffer,
                                  new_entry(cfg, std::move(mutants[i].problem),
                                            mutants[i].trajectory.summary, step,
                                            std::move(mutant_lineage[i]), mutant_edits[i]),
                                  cfg));
    }
  }

  double solved = 0.0;
  double ret = 0.0;
  for (const RolloutSummary& s : report.training_summaries) {
    solved += s.solved ? 1.0 : 0.0;
    ret += s.undiscounted_return;
  }
  const double batch = static_cast<double>(report.training_summaries.size());

  Json event{{"step", step},
             {"algo", to_string(cfg.algorithm)},
             {"replayed", report.replayed},
             {"generated", report.generated},
             {"mutated", report.mutated},
             {"inserted", report.inserted},
             {"evicted", report.evicted},
             {"train_episodes", report.training_summaries.size()},
             {"train_solve_rate", batch > 0 ? solved / batch : 0.0},
             {"train_mean_return", batch > 0 ? ret / batch : 0.0}};
  state.step = step + 1;
  if (!buffer.entries.empty())
    event["buffer_stats"] = to_json(buffer_stats(buffer, cfg, state.step));
  report.event = std::move(event);
  return report;
}

Json to_json(const BufferEntry& e) {
  Json lineage = Json::array();
  for (const Edit& edit : e.lineage)
    lineage.push_back({{"kind", to_string(edit.kind)}, {"seed", edit.seed}});
  Json j{{"problem", to_json(e.problem)},
         {"score", e.score},
         {"r_max", e.r_max},
         {"insert_step", e.insert_step},
         {"last_sampled_step", e.last_sampled_step},
         {"seq", e.seq},
         {"lineage", lineage},
         {"parent_edits", e.parent_edits}};
  j["solvable_hint"] = e.solvable_hint ? Json(*e.solvable_hint) : Json(nullptr);
  return j;
}

BufferEntry buffer_entry_from_json(const Json& j) {
  try {
    BufferEntry e;
    e.problem = problem_from_json(j.at("problem"));
    e.score = j.at("score").get<double>();
    e.r_max = j.at("r_max").get<double>();
    e.insert_step = j.at("insert_step").get<std::int64_t>();
    e.last_sampled_step = j.at("last_sampled_step").get<std::int64_t>();
    e.seq = j.at("seq").get<std::uint64_t>();
    for (const Json& edit : j.at("lineage")) {
      auto kind = parse_edit_kind(edit.at("kind").get<std::string>());
      if (!kind) throw DataError("unknown edit kind " + edit.at("kind").dump());
      e.lineage.push_back({*kind, edit.at("seed").get<std::uint64_t>()});
    }
    e.parent_edits = j.at("parent_edits").get<int>();
    if (e.parent_edits < 0 || static_cast<std::size_t>(e.parent_edits) > e.lineage.size())
      throw DataError("parent_edits exceeds the lineage length");
    if (j.contains("solvable_hint") && !j.at("solvable_hint").is_null())
      e.solvable_hint = j.at("solvable_hint").get<bool>();
    if (!std::isfinite(e.score) || e.score < 0.0) throw DataError("buffer entry score out of range");
    return e;
  } catch (const Json::exception& ex) {
    throw DataError(std::string("bad buffer entry: ") + ex.what());
  }
}

Json to_json(const CurriculumState& state) {
  Json entries = Json::array();
  for (const BufferEntry& e : state.buffer.entries) entries.push_back(to_json(e));
  return Json{{"seed", state.seed},
              {"step", state.step},
              {"next_seq", state.buffer.next_seq},
              {"buffer", entries}};
}

CurriculumState curriculum_state_from_json(const Json& j) {
  try {
    CurriculumState s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.step = j.at("step").get<std::int64_t>();
    s.buffer.next_seq = j.at("next_seq").get<std::uint64_t>();
    for (const Json& e : j.at("buffer")) s.buffer.entries.push_back(buffer_entry_from_json(e));
    return s;
  } catch (const Json::exception& ex) {
    throw DataError(std::string("bad curriculum state: ") + ex.what());
  }
}

}  // namespace rmued

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmued/curriculum.hpp"
#include "rmued/metrics.hpp"
#include "rmued/mutations.hpp"
#include "rmued/run_config.hpp"
#include "rmued/serialization.hpp"
#include "rmued/solvability.hpp"

namespace fs = std::filesystem;
using namespace rmued;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitBudget = 3;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.path, "JSON config file");
  cmd->add_option("--set", args.overrides, "Override a config key (key=value)");
  cmd->add_option("--seed", args.seed, "Root seed");
}

RunConfig load_config(const ConfigArgs& args) {
  RunConfig cfg;
  if (!args.path.empty()) {
    Json j = Json::parse(read_file(args.path), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + args.path + " is not valid JSON");
    cfg = run_config_from_json(j);
  }
  for (const std::string& o : args.overrides) cfg = run_config_from_json(parse_override(o), cfg);
  if (args.seed) cfg.seed = *args.seed;
  check_config(cfg);
  return cfg;
}

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    return;
  }
  write_file_atomic(path, contents);
}

int cmd_sample(const ConfigArgs& args, int n, const std::string& out) {
  RunConfig cfg = load_config(args);
  const GeneratorConfig& g = cfg.curriculum.generator;
  std::string text;
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(cfg.seed, "sample", static_cast<std::uint64_t>(i));
    text += dump_line(to_json(sample_problem(rng, g.mode, g.level, g.task))) + "\n";
  }
  write_output(out, text);
  return 0;
}

int cmd_solvability(const ConfigArgs& args, int batches, int batch_size, bool configured_only,
                    int jobs, const std::string& out) {
  RunConfig cfg = load_config(args);
  const GeneratorConfig& g = cfg.curriculum.generator;
  Json cells = Json::array();
  auto add_cell = [&](ProblemMode mode, RmStructure structure) {
    TaskSamplerConfig task = g.task;
    task.structure = structure;
    SolvabilityRate r =
        batch_solvability_rate(cfg.seed, mode, g.level, task, batches, batch_size, jobs);
    cells.push_back({{"mode", to_string(mode)},
                     {"structure", to_string(structure)},
                     {"mean", r.mean},
                     {"stddev", r.stddev},
                     {"batch_rates", r.batch_rates}});
  };
  if (configured_only) {
    add_cell(g.mode, g.task.structure);
  } else {
    for (ProblemMode mode : {ProblemMode::independent, ProblemMode::level_conditioned})
      for (RmStructure s : {RmStructure::sequential, RmStructure::dag}) add_cell(mode, s);
  }
  Json report{{"seed", cfg.seed},
              {"batches", batches},
              {"batch_size", batch_size},
              {"rooms", g.level.room_choices},
              {"cells", cells}};
  write_output(out, report.dump(2) + "\n");
  return 0;
}

// Keeps the events of steps before `step`; drops a trailing partial line.
void truncate_events(const fs::path& path, std::int64_t step) {
  if (!fs::exists(path)) return;
  std::istringstream in(read_file(path.string()));
  std::string kept;
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no terminating newline
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("step")) break;
    if (j["step"].get<std::int64_t>() >= step) break;
    kept += line + "\n";
  }
  write_file_atomic(path.string(), kept);
}

int cmd_run(const ConfigArgs& args, const std::string& out_dir_flag, bool resume, int jobs,
            double time_budget) {
  RunConfig cfg = load_config(args);
  if (!out_dir_flag.empty()) cfg.output_dir = out_dir_flag;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const fs::path config_path = dir / "config.json";
  const fs::path checkpoint_path = dir / "checkpoint.json";
  const fs::path events_path = dir / "events.jsonl";

  // The output directory is not part of a run's identity.
  Json identity = to_json(cfg);
  identity.erase("output_dir");
  CurriculumState state;
  state.seed = cfg.seed;
  if (resume) {
    if (!fs::exists(config_path) || !fs::exists(checkpoint_path))
      throw DataError("nothing to resume in " + dir.string());
    Json saved = Json::parse(read_file(config_path.string()), nullptr, false);
    if (saved.is_discarded()) throw DataError("corrupt " + config_path.string());
    saved.erase("output_dir");
    if (saved != identity) throw ConfigError("resume config differs from " + config_path.string());
    Json ckpt = Json::parse(read_file(checkpoint_path.string()), nullptr, false);
    if (ckpt.is_discarded()) throw DataError("corrupt " + checkpoint_path.string());
    state = curriculum_state_from_json(ckpt);
    truncate_events(events_path, state.step);
  } else {
    write_file_atomic(config_path.string(), to_json(cfg).dump(2) + "\n");
    write_file_atomic(events_path.string(), "");
  }

  StudentFactory student = student_factory(cfg.student);
  std::ofstream events(events_path, std::ios::app | std::ios::binary);
  if (!events) throw DataError("cannot open " + events_path.string());
  const auto start = std::chrono::steady_clock::now();
  auto save = [&] { write_file_atomic(checkpoint_path.string(), to_json(state).dump() + "\n"); };
  while (state.step < cfg.steps) {
    StepReport report = ued_step(state, student, cfg.curriculum, jobs);
    events << dump_line(report.event) << "\n";
    events.flush();
    if (state.step % cfg.checkpoint_every == 0 || state.step == cfg.steps) save();
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_budget > 0.0 && elapsed > time_budget && state.step < cfg.steps) {
      save();
      throw BudgetExceeded("time budget exhausted at step " + std::to_string(state.step) +
                           "; resume with --resume");
    }
  }
  save();
  return 0;
}

int cmd_eval(const ConfigArgs& args, const std::string& problems_path, int reps,
             std::vector<double> alphas, int jobs, const std::string& out) {
  RunConfig cfg = load_config(args);
  std::vector<Problem> problems = read_problem_set(problems_path);
  if (problems.empty()) throw DataError(problems_path + " holds no problems");
  EvalOptions options;
  options.reps = reps;
  if (!alphas.empty()) options.alphas = std::move(alphas);
  for (double a : options.alphas)
    if (!(a > 0.0 && a <= 100.0)) throw ConfigError("alpha must lie in (0, 100]");
  options.rollout.horizon = cfg.curriculum.horizon;
  options.rollout.observation = cfg.curriculum.observation;
  options.jobs = jobs;
  EvalReport report = evaluate(student_factory(cfg.student), problems, cfg.seed, options);
  write_output(out, to_json(report).dump(2) + "\n");
  return 0;
}

Json read_single_json(const std::string& path) {
  std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (!j.is_discarded()) return j;
  // Fall back to the first line of a JSONL file.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  j = Json::parse(line, nullptr, false);
  if (j.is_discarded()) throw DataError(path + " is not valid JSON");
  return j;
}

int cmd_mutate(const ConfigArgs& args, const std::string& problem_path, int count,
               const std::string& out) {
  RunConfig cfg = load_config(args);
  Problem problem = problem_from_json(read_single_json(problem_path));
  std::string text;
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(cfg.seed, "mutate", static_cast<std::uint64_t>(i));
    Mutation m = mutate(problem, rng, nullptr, cfg.curriculum.mutation);
    Json edits = Json::array();
    for (const Edit& e : m.edits) edits.push_back({{"kind", to_string(e.kind)}, {"seed", e.seed}});
    text += dump_line(Json{{"problem", to_json(m.problem)}, {"edits", edits}}) + "\n";
  }
  write_output(out, text);
  return 0;
}

int cmd_export_graph(const std::string& rm_path, std::optional<int> state,
                     const std::string& out) {
  Json j = read_single_json(rm_path);
  // Accept a bare machine or a problem record.
  RewardMachine rm = rm_from_json(j.contains("rm") ? j.at("rm") : j);
  if (state && (*state < 0 || *state >= rm.num_states))
    throw DataError("state " + std::to_string(*state) + " is not in the machine");
  write_output(out, to_json(export_policy_graph(rm, state)).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint task and level autocurriculum over reward machines and gridworlds"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("-j,--jobs", jobs, "Worker threads for rollouts")->check(CLI::PositiveNumber);

  ConfigArgs args;
  std::string out;

  auto* sample = app.add_subcommand("sample", "Write sampled problems as JSONL");
  add_config_options(sample, args);
  int n = 1;
  sample->add_option("-n,--count", n, "Number of problems")->check(CLI::NonNegativeNumber);
  sample->add_option("-o,--out", out, "Output file (default stdout)");

  auto* solv = app.add_subcommand("solvability", "Static solvability rates per mode and structure");
  add_config_options(solv, args);
  int batches = 5;
  int batch_size = 4096;
  bool configured_only = false;
  solv->add_option("--batches", batches)->check(CLI::PositiveNumber);
  solv->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);
  solv->add_flag("--configured-only", configured_only,
                 "Only the configured mode and structure");
  solv->add_option("-o,--out", out, "Output file (default stdout)");

  auto* run = app.add_subcommand("run", "Run the curriculum loop");
  add_config_options(run, args);
  std::string out_dir;
  bool resume = false;
  double time_budget = 0.0;
  run->add_option("-d,--out-dir", out_dir, "Output directory (overrides output_dir)");
  run->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");
  run->add_option("--time-budget", time_budget, "Seconds before stopping with exit code 3");

  auto* eval = app.add_subcommand("eval", "Evaluate the student on a problem set");
  add_config_options(eval, args);
  std::string problems_path;
  int reps = 10;
  std::vector<double> alphas;
  eval->add_option("problems", problems_path, "Problem JSONL file")->required();
  eval->add_option("--reps", reps)->check(CLI::PositiveNumber);
  eval->add_option("--alpha", alphas, "CVaR levels in percent");
  eval->add_option("-o,--out", out, "Output file (default stdout)");

  auto* mut = app.add_subcommand("mutate", "Mutate a problem");
  add_config_options(mut, args);
  std::string problem_path;
  int count = 1;
  mut->add_option("problem", problem_path, "Problem JSON (or first line of a JSONL file)")
      ->required();
  mut->add_option("-n,--count", count, "Number of mutants")->check(CLI::NonNegativeNumber);
  mut->add_option("-o,--out", out, "Output file (default stdout)");

  auto* graph = app.add_subcommand("export-graph", "Export the policy graph of a reward machine");
  std::string rm_path;
  std::optional<int> state;
  graph->add_option("rm", rm_path, "Reward machine or problem JSON")->required();
  graph->add_option("--state", state, "Current RM state to mark");
  graph->add_option("-o,--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sample) return cmd_sample(args, n, out);
    if (*solv) return cmd_solvability(args, batches, batch_size, configured_only, jobs, out);
    if (*run) return cmd_run(args, out_dir, resume, jobs, time_budget);
    if (*eval) return cmd_eval(args, problems_path, reps, alphas, jobs, out);
    if (*mut) return cmd_mutate(args, problem_path, count, out);
    if (*graph) return cmd_export_graph(rm_path, state, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const StructuralError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}

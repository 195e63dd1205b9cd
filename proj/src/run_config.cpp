#include "rmued/run_config.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "rmued/serialization.hpp"

namespace rmued {

namespace {

template <class T>
T get(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
  }
}

template <class Enum, class Parse>
Enum get_enum(const Json& v, const std::string& key, Parse parse) {
  auto parsed = parse(get<std::string>(v, key));
  if (!parsed) throw ConfigError("config key '" + key + "' has an unknown value: " + v.dump());
  return *parsed;
}

using Setter = std::function<void(RunConfig&, const Json&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = [] {
    std::vector<std::pair<std::string, Setter>> t;
    auto add = [&](std::string key, Setter s) { t.emplace_back(std::move(key), std::move(s)); };
    add("seed", [](RunConfig& c, const Json& v, const std::string& k) {
      c.seed = get<std::uint64_t>(v, k);
    });
    add("algorithm", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.algorithm = get_enum<Algorithm>(v, k, parse_algorithm);
    });
    add("mode", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.mode = get_enum<ProblemMode>(v, k, parse_problem_mode);
    });
    add("structure", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.structure = get_enum<RmStructure>(v, k, parse_rm_structure);
    });
    add("reward", [](RunConfig& c, const Json& v, const std::string& k) {
      RewardKind r = get_enum<RewardKind>(v, k, parse_reward_kind);
      c.curriculum.generator.task.sequential.reward = r;
      c.curriculum.generator.task.random_walk.reward = r;
    });
    add("rooms", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.level.room_choices = get<std::vector<int>>(v, k);
    });
    add("object_count", [](RunConfig& c, const Json& v, const std::string& k) {
      if (v.is_null()) {
        c.curriculum.generator.level.object_count.reset();
        return;
      }
      auto range = get<std::vector<int>>(v, k);
      if (range.size() != 2) throw ConfigError("object_count must be [min, max] or null");
      c.curriculum.generator.level.object_count = ObjectRange{range[0], range[1]};
    });
    add("seq_min_length", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.sequential.min_length = get<int>(v, k);
    });
    add("seq_max_length", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.sequential.max_length = get<int>(v, k);
    });
    add("rw_num_states", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.random_walk.num_states = get<int>(v, k);
    });
    add("rw_connectivity", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.random_walk.connectivity = get<double>(v, k);
    });
    add("rw_restart", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.random_walk.restart = get<double>(v, k);
    });
    add("rw_max_paths", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.generator.task.random_walk.max_paths = get<int>(v, k);
    });
    add("buffer_capacity", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.buffer_capacity = get<int>(v, k);
    });
    add("replay_rate", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.replay_rate = v.is_null() ? -1.0 : get<double>(v, k);
      if (!v.is_null() && c.curriculum.replay_rate < 0.0)
        throw ConfigError("replay_rate must lie in [0, 1]");
    });
    add("temperature", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.temperature = get<double>(v, k);
    });
    add("staleness_coef", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.staleness_coef = get<double>(v, k);
    });
    add("score_fn", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.score_fn = get_enum<ScoreFn>(v, k, parse_score_fn);
    });
    add("score_momentum", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.score_momentum = get<double>(v, k);
    });
    add("min_edits", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.mutation.min_edits = get<int>(v, k);
    });
    add("max_edits", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.mutation.max_edits = get<int>(v, k);
    });
    add("max_states", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.mutation.max_states = get<int>(v, k);
    });
    add("horizon", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.horizon = get<int>(v, k);
    });
    add("gamma", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.gamma = get<double>(v, k);
      c.student.planner.gamma = c.curriculum.gamma;
    });
    add("lambda", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.lambda = get<double>(v, k);
    });
    add("episodes_per_step", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.episodes_per_step = get<int>(v, k);
    });
    add("solvable_hint", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.solvable_hint = get<bool>(v, k);
    });
    add("occlusion", [](RunConfig& c, const Json& v, const std::string& k) {
      c.curriculum.observation.occlusion = get<bool>(v, k);
      c.student.planner.observation = c.curriculum.observation;
    });
    add("student", [](RunConfig& c, const Json& v, const std::string& k) {
      c.student.name = get<std::string>(v, k);
    });
    add("student_command", [](RunConfig& c, const Json& v, const std::string& k) {
      c.student.command = get<std::string>(v, k);
    });
    add("steps", [](RunConfig& c, const Json& v, const std::string& k) {
      c.steps = get<int>(v, k);
    });
    add("checkpoint_every", [](RunConfig& c, const Json& v, const std::string& k) {
      c.checkpoint_every = get<int>(v, k);
    });
    add("output_dir", [](RunConfig& c, const Json& v, const std::string& k) {
      c.output_dir = get<std::string>(v, k);
    });
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, setter] : setters()) k.push_back(key);
    return k;
  }();
  return keys;
}

RunConfig run_config_from_json(const Json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto& table = setters();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& entry) { return entry.first == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(base, value, key);
  }
  check_config(base);
  return base;
}

Json to_json(const RunConfig& c) {
  const CurriculumConfig& cc = c.curriculum;
  const GeneratorConfig& g = cc.generator;
  Json object_count = g.level.object_count
                          ? Json::array({g.level.object_count->min, g.level.object_count->max})
                          : Json(nullptr);
  return Json{{"seed", c.seed},
              {"algorithm", to_string(cc.algorithm)},
              {"mode", to_string(g.mode)},
              {"structure", to_string(g.task.structure)},
              {"reward", to_string(g.task.sequential.reward)},
              {"rooms", g.level.room_choices},
              {"object_count", object_count},
              {"seq_min_length", g.task.sequential.min_length},
              {"seq_max_length", g.task.sequential.max_length},
              {"rw_num_states", g.task.random_walk.num_states},
              {"rw_connectivity", g.task.random_walk.connectivity},
              {"rw_restart", g.task.random_walk.restart},
              {"rw_max_paths", g.task.random_walk.max_paths},
              {"buffer_capacity", cc.buffer_capacity},
              {"replay_rate", cc.replay_rate < 0.0 ? Json(nullptr) : Json(cc.replay_rate)},
              {"temperature", cc.temperature},
              {"staleness_coef", cc.staleness_coef},
              {"score_fn", to_string(cc.score_fn)},
              {"score_momentum", cc.score_momentum},
              {"min_edits", cc.mutation.min_edits},
              {"max_edits", cc.mutation.max_edits},
              {"max_states", cc.mutation.max_states},
              {"horizon", cc.horizon},
              {"gamma", cc.gamma},
              {"lambda", cc.lambda},
              {"episodes_per_step", cc.episodes_per_step},
              {"solvable_hint", cc.solvable_hint},
              {"occlusion", cc.observation.occlusion},
              {"student", c.student.name},
              {"student_command", c.student.command},
              {"steps", c.steps},
              {"checkpoint_every", c.checkpoint_every},
              {"output_dir", c.output_dir}};
}

void check_config(const RunConfig& c) {
  check_config(c.curriculum);
  const SequentialRmConfig& seq = c.curriculum.generator.task.sequential;
  if (seq.min_length < 1 || seq.min_length > seq.max_length)
    throw ConfigError("sequential lengths must satisfy 1 <= seq_min_length <= seq_max_length");
  check_config(c.curriculum.generator.task.random_walk);
  if (c.steps < 0) throw ConfigError("steps must be non-negative");
  if (c.checkpoint_every < 1) throw ConfigError("checkpoint_every must be at least 1");
  if (c.student.name != "planner" && c.student.name != "random" && c.student.name != "external")
    throw ConfigError("unknown student '" + c.student.name + "'");
  if (c.student.name == "external" && c.student.command.empty())
    throw ConfigError("the external student needs student_command");
}

Json parse_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  std::string key = assignment.substr(0, eq);
  std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  return Json{{key, value}};
}

}  // namespace rmued

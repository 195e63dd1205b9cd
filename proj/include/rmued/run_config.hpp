#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmued/curriculum.hpp"
#include "rmued/students.hpp"

namespace rmued {

/// Everything a command needs, read from a flat JSON object. Unknown keys and
/// out-of-range values raise ConfigError.
struct RunConfig {
  std::uint64_t seed = 0;
  CurriculumConfig curriculum;
  StudentSpec student;
  int steps = 200;
  int checkpoint_every = 10;
  std::string output_dir = "run";
};

/// Applies the keys of `j` on top of `base`.
RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig base = {});
nlohmann::ordered_json to_json(const RunConfig& cfg);
void check_config(const RunConfig& cfg);

/// Parses a `key=value` override; the value is read as JSON when it parses,
/// otherwise as a string.
nlohmann::ordered_json parse_override(const std::string& assignment);

/// Accepted keys, in output order.
const std::vector<std::string>& run_config_keys();

}  // namespace rmued

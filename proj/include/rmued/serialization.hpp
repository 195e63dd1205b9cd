#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmued/gridworld.hpp"
#include "rmued/problem.hpp"
#include "rmued/reward_machine.hpp"

namespace rmued {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const RewardMachine& rm);
/// Accepts arbitrary integer state ids and renumbers them by position in
/// `states`. Validates the result; throws DataError.
RewardMachine rm_from_json(const Json& j);

Json to_json(const Level& level);
Level level_from_json(const Json& j);

Json to_json(const Problem& problem);
Problem problem_from_json(const Json& j);

Json to_json(const PolicyGraph& graph);
Json to_json(const LiteralFeatures& features);
Json to_json(const Observation& obs);

/// Props as sorted proposition names.
Json to_json_names(const PropSet& props);

/// Compact single-line dump used for JSONL output.
std::string dump_line(const Json& j);

/// Writes to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

/// One problem per line; blank lines are skipped. Errors carry the line
/// number.
std::vector<Problem> read_problem_set(const std::string& path);

}  // namespace rmued

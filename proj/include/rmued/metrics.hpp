#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "json.hpp"
#include "rmued/problem.hpp"
#include "rmued/students.hpp"

namespace rmued {

/// Mean of the ceil(alpha/100 * n) smallest rates. Throws
/// std::invalid_argument on empty input or alpha outside (0, 100].
double cvar(std::vector<double> rates, double alpha);

/// Drops floor(n/4) values from each end of the sorted rates and averages
/// the rest. Throws std::invalid_argument on empty input.
double iqm(std::vector<double> rates);

inline const std::vector<double> kDefaultAlphas{1, 2, 5, 10, 20, 50, 100};

struct EvalOptions {
  int reps = 10;
  std::vector<double> alphas = kDefaultAlphas;
  RolloutOptions rollout;
  int jobs = 1;
};

struct EvalReport {
  std::vector<double> solve_rates;  // per problem
  std::map<double, double> cvar_curve;
  double iqm = 0.0;
  double mean = 0.0;
  int reps = 0;
};

/// Rollout (problem i, rep r) uses its own seed stream, so the report does
/// not depend on `jobs`.
EvalReport evaluate(const StudentFactory& student, const std::vector<Problem>& problems,
                    std::uint64_t seed, const EvalOptions& options = {});

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace rmued

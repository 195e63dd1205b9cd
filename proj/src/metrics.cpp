#include "rmued/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rmued/parallel.hpp"
#include "rmued/rng.hpp"

namespace rmued {

double cvar(std::vector<double> rates, double alpha) {
  if (rates.empty()) throw std::invalid_argument("cvar of an empty rate list");
  if (!(alpha > 0.0 && alpha <= 100.0)) throw std::invalid_argument("cvar alpha outside (0, 100]");
  std::sort(rates.begin(), rates.end());
  const double n = static_cast<double>(rates.size());
  auto k = static_cast<std::size_t>(std::ceil(alpha / 100.0 * n - 1e-12));
  k = std::clamp<std::size_t>(k, 1, rates.size());
  return std::accumulate(rates.begin(), rates.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
         static_cast<double>(k);
}

double iqm(std::vector<double> rates) {
  if (rates.empty()) throw std::invalid_argument("iqm of an empty rate list");
  std::sort(rates.begin(), rates.end());
  const std::size_t drop = rates.size() / 4;
  auto first = rates.begin() + static_cast<std::ptrdiff_t>(drop);
  auto last = rates.end() - static_cast<std::ptrdiff_t>(drop);
  return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

EvalReport evaluate(const StudentFactory& student, const std::vector<Problem>& problems,
                    std::uint64_t seed, const EvalOptions& options) {
  if (problems.empty()) throw std::invalid_argument("evaluate on an empty problem set");
  if (options.reps < 1) throw std::invalid_argument("evaluate needs at least one rep");
  const std::size_t reps = static_cast<std::size_t>(options.reps);
  std::vector<char> solved(problems.size() * reps, 0);
  parallel_for(solved.size(), options.jobs, [&](std::size_t k) {
    const std::size_t i = k / reps;
    const std::size_t r = k % reps;
    std::unique_ptr<Student> s = student();
    std::uint64_t episode_seed = Rng::stream(seed, "eval", i, r).next_u64();
    solved[k] = rollout(problems[i], *s, episode_seed, options.rollout).summary.solved ? 1 : 0;
  });
  EvalReport report;
  report.reps = options.reps;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    int count = 0;
    for (std::size_t r = 0; r < reps; ++r) count += solved[i * reps + r];
    report.solve_rates.push_back(static_cast<double>(count) / static_cast<double>(reps));
  }
  for (double a : options.alphas) report.cvar_curve[a] = cvar(report.solve_rates, a);
  report.iqm = iqm(report.solve_rates);
  report.mean = cvar(report.solve_rates, 100.0);
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json curve = nlohmann::ordered_json::object();
  for (const auto& [alpha, value] : report.cvar_curve) {
    std::ostringstream key;
    key << alpha;
    curve[key.str()] = value;
  }
  return {{"reps", report.reps},
          {"num_problems", report.solve_rates.size()},
          {"iqm", report.iqm},
          {"mean", report.mean},
          {"cvar", curve},
          {"solve_rates", report.solve_rates}};
}

}  // namespace rmued

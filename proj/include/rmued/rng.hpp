#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace rmued {

/// Seeded random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so every distribution used
/// by the project is implemented here on top of raw 64-bit draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream derived from a root seed, a stream name and up to two
  /// integer coordinates (e.g. step and slot).
  static Rng stream(std::uint64_t root_seed, std::string_view name, std::uint64_t a = 0,
                    std::uint64_t b = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform integer in [lo, hi] (inclusive).
  int uniform_int(int lo, int hi);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform01();

  bool bernoulli(double p) { return uniform01() < p; }

  /// Index drawn proportionally to non-negative weights. Throws when the
  /// total weight is zero.
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  template <class T>
  const T& pick(const std::vector<T>& values) {
    if (values.empty()) throw std::invalid_argument("Rng::pick on empty range");
    return values[static_cast<std::size_t>(uniform_index(values.size()))];
  }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace rmued

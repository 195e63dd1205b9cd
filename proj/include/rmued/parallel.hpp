#pragma once

#include <cstddef>
#include <functional>

namespace rmued {

/// Runs body(i) for every i in [0, n) on up to `jobs` threads. Indices are
/// handed out dynamically; the first exception thrown is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace rmued

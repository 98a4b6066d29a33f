#pragma once

#include <cstddef>
#include <functional>

namespace fast {

/// Worker count: FAST_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Results
/// must be written to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t max_workers = 0);

}  // namespace fast

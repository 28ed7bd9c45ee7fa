#pragma once

#include <cstddef>
#include <functional>

namespace blpcs {

/// Worker count: BLPCS_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = thread_count()).
/// Indices are handed out dynamically; callers must write results by index so
/// the outcome does not depend on scheduling. The first exception thrown by
/// any task is rethrown after all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace blpcs

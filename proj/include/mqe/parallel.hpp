#pragma once

#include <cstddef>
#include <functional>

namespace mqe {

/// Process-wide cap on worker threads (default 1). Results never depend on
/// it: every parallel loop writes to per-index slots and reductions happen
/// afterwards in index order.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() workers.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mqe

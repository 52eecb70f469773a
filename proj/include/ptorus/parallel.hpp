#pragma once

// Data-parallel loop with a process-wide thread cap. Work items are written
// by index, so results never depend on the thread count.

#include <cstddef>
#include <functional>

namespace ptorus {

/// Cap on worker threads. 0 restores the default: PAINLEVE_TORUS_THREADS if
/// set, otherwise the hardware concurrency.
void set_max_threads(int n);
int max_threads();

/// Calls body(i) for i in [0, n). Exceptions from workers are rethrown
/// (the one with the smallest index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace ptorus

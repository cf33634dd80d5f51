#pragma once

#include <cstddef>
#include <functional>

namespace graphflow {

// Worker count for row-parallel kernels. Read once from GRAPHFLOW_THREADS
// (default 1); set_thread_count overrides it for the current process.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Calls fn(begin, end) over contiguous chunks of [0, n). Each row is
// handled by exactly one call, so per-row results do not depend on the
// number of workers.
void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace graphflow

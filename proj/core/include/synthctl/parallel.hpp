#pragma once

#include <cstddef>
#include <functional>

namespace synthctl {

/// Worker count: SYNTHCTL_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Callers write
/// results into slot i, so aggregation order never depends on scheduling.
/// If any call throws, the exception of the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace synthctl

#pragma once

#include <functional>

namespace octic {

/// Worker count: OCTIC_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
int thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` threads. Work is split into
/// contiguous ranges; exceptions are rethrown on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace octic

#pragma once

#include <cstdint>
#include <functional>

namespace drln {

/// Worker count for internal op parallelism and per-image pipelines.
/// Initialized from DRLN_THREADS (clamped to hardware concurrency).
int thread_count();
void set_thread_count(int n);

/// Runs fn(begin, end) over contiguous chunks of [0, n), one chunk per worker.
/// Chunk boundaries never affect results: callers compute each element
/// independently with a fixed inner accumulation order.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace drln

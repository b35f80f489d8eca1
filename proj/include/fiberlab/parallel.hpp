#pragma once

#include <cstddef>
#include <functional>

namespace fiberlab {

/// Worker count: FIBERLAB_THREADS if set and positive, else hardware parallelism.
unsigned worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Bodies must not share
/// mutable state; results are written to caller-owned, index-addressed slots.
/// Exceptions thrown by a body are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fiberlab

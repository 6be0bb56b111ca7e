#pragma once

#include <cstddef>
#include <functional>

namespace plastafem {

/// Worker count: PLASTAFEM_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_threads();

/// Calls body(i) for i in [0, n) split into contiguous chunks across workers.
/// Bodies must only write to slots owned by their index; results are then
/// independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace plastafem

#pragma once

#include <cstddef>
#include <functional>

namespace rtv {

/// Worker count: RTV_THREADS when set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
int thread_budget();

/// Runs fn(i) for i in [0, n), spread over `threads` workers (0 means
/// thread_budget()). Results must be written to disjoint, preallocated
/// slots so the output is identical for any worker count. The first
/// exception thrown by any fn is rethrown on the caller, after all
/// workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace rtv

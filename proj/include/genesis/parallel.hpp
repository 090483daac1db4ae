#pragma once

#include <cstddef>
#include <functional>

namespace genesis {

// Worker cap for parallel_for; 0 means hardware concurrency.
void set_max_jobs(int jobs);
int max_jobs();

// Runs fn(i) for i in [0, n), split into contiguous chunks across worker
// threads. Each index is handled by exactly one thread, so writes to
// disjoint per-index state need no locking and results are independent of
// the worker count. Calls made from inside a worker run serially (no
// nested pools).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace genesis

#pragma once

#include <cstddef>
#include <functional>

namespace signorini {

// Process-wide worker count for node-parallel loops (>= 1).
void set_thread_count(int n);
int thread_count();

// Calls fn(begin, end) on disjoint contiguous chunks of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace signorini

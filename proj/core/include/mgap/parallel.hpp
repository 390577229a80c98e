#pragma once

#include <cstddef>
#include <functional>

namespace mgap {

// Worker-pool cap used by parallel_for. 0 means hardware concurrency.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Each index must write only to its own
// output slot; reductions happen after the call, in index order, so the
// numeric result is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mgap

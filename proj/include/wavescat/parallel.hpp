#pragma once

#include <cstddef>
#include <functional>

namespace wavescat {

int default_workers();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Indices are handed out
// in contiguous blocks, so any per-index output slot is written by one thread.
// The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

} // namespace wavescat

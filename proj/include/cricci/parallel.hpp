#pragma once

#include <cstddef>
#include <functional>

namespace cricci {

// Global worker count for parallel scans. 0 means hardware concurrency.
void set_num_threads(int n);
int num_threads();

// Chunked parallel loop over [0, n). Each index is processed exactly once;
// callers write results into per-index slots, so output is independent of
// the worker count and schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace cricci

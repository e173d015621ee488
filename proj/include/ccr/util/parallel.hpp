#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace ccr {

// Runs fn(0..n-1) on up to `threads` workers. Tasks must be independent;
// results keyed by index stay deterministic regardless of scheduling. The
// first exception (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int hardware_threads();

}  // namespace ccr

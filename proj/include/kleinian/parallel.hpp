#pragma once
// Static-partition parallel loop. Results are written by index, so the
// outcome never depends on the worker count.

#include <cstddef>
#include <exception>
#include <functional>

namespace kleinian {

// Worker count from KLEINIAN_THREADS, else the hardware concurrency.
int default_thread_count();
// requested <= 0 selects default_thread_count().
int resolve_threads(int requested);

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace kleinian

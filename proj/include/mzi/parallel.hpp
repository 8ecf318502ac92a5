#pragma once

#include <cstddef>
#include <functional>

namespace mzi {

/// Environment variable holding the worker thread count.
inline constexpr const char* kThreadsEnv = "MZI_THREADS";

/// Thread count from MZI_THREADS, else the hardware concurrency (at least 1).
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; the first exception thrown is rethrown after all
/// workers have joined.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace mzi

#pragma once

#include <cstddef>
#include <functional>

namespace symplane {

// Process-wide worker count used by every parallel stage. Defaults to the
// SYMPLANE_THREADS environment variable, else the hardware concurrency.
int thread_count();
void set_thread_count(int n);
int default_thread_count();

// Runs body(begin, end) over contiguous blocks of at most `grain` indices.
// Blocks are handed out dynamically, so body must only write to state owned
// by its block; results are then independent of the schedule.
void parallel_for(
    std::size_t begin,
    std::size_t end,
    std::size_t grain,
    const std::function<void(std::size_t, std::size_t)>& body);

} // namespace symplane

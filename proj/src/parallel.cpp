#include "symplane/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace symplane {

namespace {

std::atomic<int> g_threads{0};

} // namespace

int default_thread_count() {
  if (const char* env = std::getenv("SYMPLANE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) {
        return n;
      }
    } catch (const std::exception&) {
      // fall through to hardware count
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int thread_count() {
  int n = g_threads.load();
  if (n <= 0) {
    n = default_thread_count();
    g_threads.store(n);
  }
  return n;
}

void set_thread_count(int n) {
  g_threads.store(n > 0 ? n : default_thread_count());
}

void parallel_for(
    std::size_t begin,
    std::size_t end,
    std::size_t grain,
    const std::function<void(std::size_t, std::size_t)>& body) {
  if (end <= begin) {
    return;
  }
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t blocks = (end - begin + grain - 1) / grain;
  const std::size_t workers = std::min<std::size_t>(blocks, static_cast<std::size_t>(thread_count()));
  if (workers <= 1) {
    body(begin, end);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) {
        return;
      }
      const std::size_t lo = begin + b * grain;
      const std::size_t hi = std::min(end, lo + grain);
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next.store(blocks);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

} // namespace symplane

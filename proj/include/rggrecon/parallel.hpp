#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rgg {

/// Number of worker threads used by the data-parallel kernels. 0 means
/// hardware concurrency.
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> value{0};
  return value;
}

inline unsigned worker_count() {
  const unsigned t = thread_setting().load();
  if (t != 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Set on threads that already belong to a pool; nested loops run inline there.
inline bool& inside_worker() {
  static thread_local bool flag = false;
  return flag;
}

/// Runs body(begin, end, worker) over contiguous chunks of [0, count). Chunks are
/// claimed dynamically; the first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t grain = 1024) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), (count + grain - 1) / std::max<std::size_t>(grain, 1)));
  if (workers <= 1 || inside_worker()) {
    if (count) body(std::size_t{0}, count, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](unsigned worker) {
    const bool outer = inside_worker();
    inside_worker() = true;
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(grain);
        if (begin >= count) break;
        body(begin, std::min(count, begin + grain), worker);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
    inside_worker() = outer;
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rgg

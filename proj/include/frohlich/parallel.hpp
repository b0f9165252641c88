#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace frohlich {

/// Worker count from FROHLICH_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("FROHLICH_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, n) on `workers` threads. Tasks must write only to
/// their own slot; results are then independent of scheduling. The first
/// exception thrown by any task is rethrown after all threads join.
template <class Task>
void parallel_for(std::size_t n, unsigned workers, Task&& task) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise (cascade) sum of equally shaped Eigen objects, in index order.
template <class T>
T pairwise_sum(const std::vector<T>& items, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return items[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(items, lo, mid) + pairwise_sum(items, mid, hi);
}

template <class T>
T pairwise_sum(const std::vector<T>& items) {
  return pairwise_sum(items, 0, items.size());
}

}  // namespace frohlich

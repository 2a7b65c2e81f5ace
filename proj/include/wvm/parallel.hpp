#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace wvm {

// Worker count from a request: values >= 1 are taken as-is, anything else
// falls back to the WVM_THREADS environment variable, then to the hardware.
inline int resolve_threads(int requested) {
  if (requested >= 1) return requested;
  if (const char* env = std::getenv("WVM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, count). Work items must be self-contained
// (own RNG, disjoint outputs); the first exception wins and is rethrown
// after all workers join.
inline void parallel_for(std::size_t count, int n_threads,
                         const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  n_threads = resolve_threads(n_threads);
  if (n_threads <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace wvm

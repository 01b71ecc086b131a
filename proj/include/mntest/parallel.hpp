#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mntest::detail {

// Runs body(r) for r in [0, n) on `threads` workers. Each index is handled
// exactly once; the first exception is rethrown on the calling thread.
template <class Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::int64_t>(n, 1))));
  if (threads == 1) {
    for (std::int64_t r = 0; r < n; ++r) body(r);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        if (failed.load()) return;
        const std::int64_t r = next.fetch_add(1);
        if (r >= n) return;
        try {
          body(r);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mntest::detail

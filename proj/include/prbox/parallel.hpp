#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace prbox::detail {

// Chunked parallel loop. The callable writes to its own output slot keyed by
// index, so results do not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& body, std::size_t min_per_thread = 4096) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t threads = hw == 0 ? 1 : hw;
  if (threads > 1 && n / threads < min_per_thread) threads = n / min_per_thread;
  if (threads <= 1 || n == 0) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace prbox::detail

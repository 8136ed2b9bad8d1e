#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace kinetic {

/// Worker cap shared by every parallel loop (the CLI --threads flag).
inline std::atomic<int>& max_threads() {
  static std::atomic<int> cap{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
  return cap;
}

/// Runs fn(i) for i in [0, n) on up to max_threads() workers with a static
/// contiguous partition. Callers write into per-index slots and reduce
/// afterwards, so results do not depend on the thread count.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(std::max(1, max_threads().load()), std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace kinetic

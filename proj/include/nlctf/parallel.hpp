#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace nlctf {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Run fn(i) for i in [begin, end) on up to n_threads workers. Each index is
/// processed exactly once and must write only to its own output slots, so
/// results never depend on the thread count.
template <class Fn>
void parallel_for(int begin, int end, int n_threads, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  n_threads = std::min(resolve_threads(n_threads), n);
  if (n_threads <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  const int chunk = (n + n_threads - 1) / n_threads;
  for (int w = 0; w < n_threads; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace nlctf

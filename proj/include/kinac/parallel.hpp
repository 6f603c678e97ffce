#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace kinac {

inline std::atomic<int>& thread_setting()
{
  static std::atomic<int> n{1};
  return n;
}

/// Number of worker threads used by the solvers (default 1).
inline int threads() { return thread_setting().load(); }
inline void set_threads(int n) { thread_setting().store(std::max(1, n)); }

/// Runs fn(i) for i in [0, n). Each index must write only its own outputs;
/// callers reduce per-index partial results in index order, which keeps the
/// result independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads()), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nt)
        fn(i);
    });
  for (auto& th : pool)
    th.join();
}

}  // namespace kinac

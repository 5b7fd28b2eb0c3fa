#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace cantorsurf {

// worker count: CANTORSURF_THREADS, else hardware concurrency
unsigned worker_count();

// f(lo, hi, worker) over contiguous chunks of [0, n); chunks below `grain` items run inline
template <class F>
void parallel_for(std::size_t n, F &&f, std::size_t grain = 256) {
  unsigned w = unsigned(std::min<std::size_t>(worker_count(), std::max<std::size_t>(1, n / grain)));
  if (w <= 1) {
    f(std::size_t(0), n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < w; ++t) pool.emplace_back([&, t] { f(n * t / w, n * (t + 1) / w, t); });
  for (auto &th : pool) th.join();
}

} // namespace cantorsurf

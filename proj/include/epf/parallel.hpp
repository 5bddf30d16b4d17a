#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace epf {

/// Run fn(0..count-1) across up to `jobs` worker threads. Tasks are pulled
/// from a shared counter; fn must only touch per-index state.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace epf

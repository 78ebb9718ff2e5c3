#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace sphereot {

// Process-wide worker count for data-parallel loops. Results never depend on
// it: every parallel region writes disjoint output slots and all reductions
// run sequentially afterwards.
int thread_count();
void set_thread_count(int threads);

template <typename F>
void parallel_for(int begin, int end, F&& body, int min_chunk = 1) {
  const int total = end - begin;
  const int workers =
      std::min(thread_count(), std::max(1, total / std::max(1, min_chunk)));
  if (workers <= 1 || total <= 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const int chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, w, &body, &errors] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // rethrow the lowest-chunk failure; static partitioning keeps this
  // deterministic
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sphereot

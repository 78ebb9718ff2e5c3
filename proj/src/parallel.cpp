#include "sphereot/parallel.hpp"

#include <atomic>

namespace sphereot {

namespace {
std::atomic<int> g_threads{0};  // 0 = pick from hardware
}

int thread_count() {
  const int t = g_threads.load();
  if (t > 0) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void set_thread_count(int threads) { g_threads.store(threads); }

}  // namespace sphereot

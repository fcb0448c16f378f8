#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace usc {

// Worker count: explicit setting, else CARPET_THREADS, else hardware.
int worker_count();
void set_worker_count(int n);  // 0 restores the default

// Runs body(i) for i in [0, n). Results land at their index, so the
// output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace usc

#pragma once

#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

namespace obsel {

/// Worker count for independent candidate evaluations. Reads OBSEL_THREADS;
/// unset or invalid means serial. This is the only environment variable the
/// library consults, and it may only affect speed, never results.
inline int worker_count() {
  const char* env = std::getenv("OBSEL_THREADS");
  if (env == nullptr) return 1;
  int v = std::atoi(env);
  if (v <= 0) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw != 0 && v > static_cast<int>(hw) * 4) v = static_cast<int>(hw) * 4;
  return v;
}

/// Evaluates fn(i) for i in [0, count) and returns the results in index
/// order. Each index is computed independently and written to its own slot,
/// so the output is identical for any worker count.
template <typename T, typename Fn>
std::vector<T> parallel_map(int count, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(count));
  int workers = worker_count();
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w]() {
      for (int i = w; i < count; i += workers)
        out[static_cast<std::size_t>(i)] = fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace obsel

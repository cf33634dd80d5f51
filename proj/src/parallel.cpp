#include "graphflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace graphflow {
namespace {

std::size_t env_threads() {
  const char* v = std::getenv("GRAPHFLOW_THREADS");
  if (v == nullptr) return 1;
  try {
    long n = std::stol(v);
    return n < 1 ? 1 : static_cast<std::size_t>(n);
  } catch (...) {
    return 1;
  }
}

std::atomic<std::size_t>& threads_setting() {
  static std::atomic<std::size_t> n{env_threads()};
  return n;
}

constexpr std::size_t kMinRowsPerWorker = 2048;

}  // namespace

std::size_t thread_count() { return threads_setting().load(); }

void set_thread_count(std::size_t n) { threads_setting().store(n < 1 ? 1 : n); }

void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  std::size_t workers = std::min(thread_count(), n / kMinRowsPerWorker);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    std::size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(fn, b, e);
  }
  fn(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace graphflow

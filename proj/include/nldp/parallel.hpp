#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace nldp {

// Worker cap: NLDP_WORKERS if set, otherwise hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("NLDP_WORKERS")) {
    long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(begin, end) over a fixed chunking of [0, n). The chunk layout
// depends only on n and the worker cap, and chunk results must be combined
// by the caller in chunk order, so parallel runs reproduce serial ones.
inline void parallel_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  std::size_t workers = std::min(worker_count(), n == 0 ? std::size_t{1} : n);
  if (n == 0) return;
  if (workers <= 1) {
    body(0, 0, n);
    return;
  }
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t c = 0; c < workers; ++c) {
    std::size_t begin = c * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&body, c, begin, end] { body(c, begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace nldp

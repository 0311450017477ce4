#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "socnet/errors.hpp"

namespace socnet {

// Runs f(0..count-1) across a pool of `jobs` threads and returns the results
// indexed by input, so the aggregate is identical whatever the pool size or
// scheduling order. Each task must seed itself from its own index.
template <typename F>
auto parallel_map(std::size_t count, long jobs, F f)
    -> std::vector<decltype(f(std::size_t(0)))> {
  using R = decltype(f(std::size_t(0)));
  if (jobs < 1) throw Error("parallel_map: jobs must be >= 1");
  std::vector<R> results(count);
  if (count == 0) return results;

  if (jobs == 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = f(i);
    return results;
  }

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        results[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::size_t n_threads = std::size_t(jobs) < count ? std::size_t(jobs) : count;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace socnet

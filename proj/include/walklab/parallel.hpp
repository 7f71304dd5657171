#pragma once

// Deterministic fork-join over an index range.
//
// Tasks are keyed by index, results are collected into a vector in index
// order, and any aggregation happens after the join — so outputs are
// byte-identical for every thread count.  Exceptions from workers are
// captured and rethrown on the calling thread (first index wins, so even
// the error surface is deterministic).

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "walklab/errors.hpp"

namespace walklab {

template <typename R>
std::vector<R> parallel_map(int count, int threads,
                            const std::function<R(int)>& fn) {
  if (count < 0) throw ValidationError("parallel_map: negative count");
  if (threads < 1) threads = 1;
  std::vector<R> out(static_cast<std::size_t>(count));
  if (count == 0) return out;
  if (threads == 1 || count == 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }

  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  int first_error_index = -1;

  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error_index < 0 || i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> pool;
  const int n = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace walklab

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hfseq::detail {

// Runs f(0..count-1) on up to `workers` threads. Callers store per-index
// results and reduce them in index order afterwards, which keeps every
// reduction independent of the worker count.
template <class F>
void parallel_index(int count, int workers, F&& f) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) break;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min(workers, count);
  pool.reserve(nthreads);
  for (int k = 0; k < nthreads; ++k) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hfseq::detail

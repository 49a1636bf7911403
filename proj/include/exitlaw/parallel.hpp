#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace exitlaw {

/// Worker count: EXITLAW_THREADS if set to a positive integer, otherwise the
/// available hardware parallelism.
std::size_t worker_count();

/// Calls fn(chunk_index, begin, end) for consecutive chunks of [0, n_items).
/// Chunk boundaries depend only on n_items and chunk_size, so per-chunk
/// results merged in chunk order are identical for any worker count. The
/// first exception thrown by a worker is rethrown after all workers join.
template <class Fn>
void for_each_chunk(std::size_t n_items, std::size_t chunk_size, Fn&& fn) {
  if (n_items == 0) return;
  chunk_size = std::max<std::size_t>(chunk_size, 1);
  const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  const std::size_t n_workers = std::min(worker_count(), n_chunks);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      try {
        fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n_chunks;
      }
    }
  };
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace exitlaw

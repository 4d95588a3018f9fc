#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <thread>
#include <vector>

namespace hdpower {

/// Mixes a master seed with a path of keys (cell, trial, permutation, ...) into
/// an independent-looking 64-bit seed. Pure function of its inputs, so work
/// units can be scheduled in any order on any number of threads.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

/// Worker cap: HDPOWER_THREADS if set and positive, otherwise hardware concurrency.
unsigned default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers.
///
/// Results must be written to per-index slots; the first exception (lowest
/// index) is rethrown after all workers join.
template <typename F>
void parallel_for(std::int64_t count, unsigned threads, F&& body) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::int64_t error_index = count;
  auto worker = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  const auto n_workers =
      static_cast<std::int64_t>(threads) < count ? static_cast<std::int64_t>(threads) : count;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (std::int64_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace hdpower

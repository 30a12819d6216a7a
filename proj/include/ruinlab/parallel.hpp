#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ruinlab {

/// Worker count: `requested` if nonzero, else the hardware concurrency.
inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

inline constexpr std::size_t kDefaultChunk = 4096;

/// Splits [0, n) into fixed chunks of `chunk` items, evaluates
/// `body(acc, begin, end)` on each chunk with a fresh `Acc`, and merges the
/// chunk results in chunk order. The result depends on (n, chunk) only, never
/// on the worker count or scheduling.
template <class Acc, class Body, class Merge>
Acc chunked_reduce(std::size_t n, std::size_t chunk, std::size_t workers, Acc init, Body body, Merge merge) {
  if (chunk == 0) chunk = kDefaultChunk;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> parts(n_chunks, init);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        body(parts[c], c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };

  const std::size_t w = std::min(resolve_workers(workers), std::max<std::size_t>(n_chunks, 1));
  if (w <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t i = 0; i < w; ++i) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Acc out = std::move(init);
  for (auto& p : parts) merge(out, p);
  return out;
}

}  // namespace ruinlab

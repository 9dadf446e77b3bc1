#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace qshadow::util {

/// Resolve a worker count: 0 means "use the hardware concurrency".
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static block partition of [0, n) over `workers` threads. Worker w gets one
/// contiguous range and its index, so per-worker accumulators can be merged
/// in worker order afterwards; the item-to-worker assignment depends only on
/// (n, workers), never on scheduling, which keeps runs reproducible.
inline void parallel_for_blocks(std::size_t n, int workers,
                                const std::function<void(std::size_t, std::size_t, int)>& body) {
  workers = resolve_workers(workers);
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    body(0, n, 0);
    return;
  }
  const std::size_t w = static_cast<std::size_t>(workers);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = n * t / w;
    const std::size_t end = n * (t + 1) / w;
    if (begin == end) continue;
    threads.emplace_back([&body, begin, end, t] { body(begin, end, static_cast<int>(t)); });
  }
  for (auto& th : threads) th.join();
}

/// Reduce [0, n) in fixed-size blocks. Workers fill per-block partials in any
/// order; `merge` consumes them strictly in block order, so the result is
/// bit-identical for every worker count (including 1). Backpressure keeps at
/// most ~2x workers partials alive.
template <class Partial, class Make, class Fill, class Merge>
void ordered_block_reduce(std::size_t n, std::size_t block_size, int workers, Make make,
                          Fill fill, Merge merge) {
  workers = resolve_workers(workers);
  if (n == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (n + block_size - 1) / block_size;

  if (workers <= 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      auto partial = make();
      fill(*partial, b * block_size, std::min(n, (b + 1) * block_size));
      merge(std::move(*partial));
    }
    return;
  }

  std::mutex mu;
  std::condition_variable cv;
  std::size_t next_block = 0;
  std::size_t next_merge = 0;
  std::map<std::size_t, std::unique_ptr<Partial>> done;
  const std::size_t max_pending = 2 * static_cast<std::size_t>(workers) + 1;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      std::size_t b;
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return failure || done.size() < max_pending || next_block >= n_blocks; });
        if (failure || next_block >= n_blocks) return;
        b = next_block++;
      }
      auto partial = make();
      try {
        fill(*partial, b * block_size, std::min(n, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        cv.notify_all();
        return;
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        done.emplace(b, std::move(partial));
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> threads;
  for (int t = 0; t < workers; ++t) threads.emplace_back(worker);

  {
    std::unique_lock<std::mutex> lock(mu);
    while (next_merge < n_blocks) {
      cv.wait(lock, [&] { return failure || done.count(next_merge) > 0; });
      if (failure) break;
      auto partial = std::move(done.at(next_merge));
      done.erase(next_merge);
      lock.unlock();
      cv.notify_all();
      merge(std::move(*partial));
      lock.lock();
      ++next_merge;
    }
  }
  cv.notify_all();
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qshadow::util

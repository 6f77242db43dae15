#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace branchsim {

// Deterministic map-reduce over the index range [0, n). The range is cut
// into fixed-size chunks, each chunk is reduced internally in index order,
// and the chunk results are merged in chunk order. The chunk grid depends
// only on n and chunk_size — never on the worker count — so the result is
// bit-identical whether it ran on one thread or many.
template <typename Acc, typename ChunkFn, typename MergeFn>
Acc chunked_reduce(std::size_t n, std::size_t chunk_size, unsigned threads, Acc init,
                   ChunkFn chunk_fn, MergeFn merge) {
  if (n == 0) return init;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<Acc> partial(chunks);

  if (threads <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      std::size_t lo = c * chunk_size;
      partial[c] = chunk_fn(lo, std::min(n, lo + chunk_size));
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&]() {
      while (true) {
        std::size_t c = next.fetch_add(1);
        if (c >= chunks) return;
        try {
          std::size_t lo = c * chunk_size;
          partial[c] = chunk_fn(lo, std::min(n, lo + chunk_size));
        } catch (...) {
          std::lock_guard<std::mutex> hold(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    unsigned workers = threads < chunks ? threads : static_cast<unsigned>(chunks);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  Acc acc = init;
  for (std::size_t c = 0; c < chunks; ++c) acc = merge(acc, partial[c]);
  return acc;
}

}  // namespace branchsim

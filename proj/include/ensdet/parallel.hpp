#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ensdet {

// Static contiguous chunking: chunk c covers [c*n/chunks, (c+1)*n/chunks).
// The partition depends only on n and the chunk count, so callers that merge
// per-chunk results in chunk order get the same output for any thread count.
struct ChunkRange {
  std::size_t index;
  std::size_t begin;
  std::size_t end;
};

inline std::size_t chunk_count(std::size_t n, unsigned jobs) {
  return std::max<std::size_t>(1, std::min<std::size_t>(n, std::max(1u, jobs)));
}

// Runs fn(ChunkRange) for every chunk, one thread per chunk beyond the first.
// The first exception thrown by any chunk is rethrown on the caller's thread.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned jobs, Fn&& fn) {
  const std::size_t chunks = chunk_count(n, jobs);
  auto range = [&](std::size_t c) { return ChunkRange{c, c * n / chunks, (c + 1) * n / chunks}; };
  if (chunks == 1) {
    fn(range(0));
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks - 1);
  for (std::size_t c = 1; c < chunks; ++c) {
    threads.emplace_back([&, c] {
      try {
        fn(range(c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  try {
    fn(range(0));
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ensdet

#ifndef DEVLAB_PARALLEL_HPP
#define DEVLAB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace devlab {

/// Worker count: DEVLAB_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DEVLAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over contiguous blocks of [0, count). Blocks are
/// fixed by `count` and `block` alone; callers write into per-index slots, so
/// results do not depend on the number of workers.
template <class Body>
void parallel_blocks(std::size_t count, std::size_t block, Body&& body) {
  if (count == 0) return;
  block = std::max<std::size_t>(block, 1);
  const std::size_t nblocks = (count + block - 1) / block;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), nblocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) body(b * block, std::min(count, (b + 1) * block));
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < nblocks; b += workers)
          body(b * block, std::min(count, (b + 1) * block));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace devlab

#endif  // DEVLAB_PARALLEL_HPP

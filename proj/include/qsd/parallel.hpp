#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qsd {

/// Splits [0, count) into contiguous shards and runs fn(begin, end, shard)
/// on a worker per shard. Callers merge per-shard buffers in shard order, so
/// results do not depend on the thread count.
inline void for_shards(std::size_t count, int threads,
                       const std::function<void(std::size_t, std::size_t, int)>& fn) {
  if (threads < 1) threads = 1;
  const std::size_t nshards = std::min<std::size_t>(threads, count ? count : 1);
  const std::size_t base = count / nshards, extra = count % nshards;
  std::vector<std::thread> pool;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < nshards; ++s) {
    const std::size_t end = begin + base + (s < extra ? 1 : 0);
    if (s + 1 == nshards) {
      fn(begin, end, static_cast<int>(s));  // run the last shard inline
    } else {
      pool.emplace_back(fn, begin, end, static_cast<int>(s));
    }
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace qsd

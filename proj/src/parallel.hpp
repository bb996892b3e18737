#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace concept_dist::detail {

/// Runs fn(first, last) over contiguous chunks of [0, n). Each index is
/// handled by exactly one call, so writes to per-index slots never race.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t first = n * w / workers;
        const std::size_t last = n * (w + 1) / workers;
        pool.emplace_back([&fn, first, last] { fn(first, last); });
    }
}

} // namespace concept_dist::detail

#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

#include "gaeco/types.hpp"

namespace gaeco {

/// Intra-op thread cap: GAECO_THREADS if set, else hardware concurrency.
inline int thread_count() {
    static const int count = [] {
        if (const char* env = std::getenv("GAECO_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) return v;
        }
        return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    }();
    return count;
}

/// Runs fn(begin, end) over a static partition of [0, n). Each index is
/// handled by exactly one call, so per-index results do not depend on the
/// thread count.
template <typename Fn>
void parallel_for(Index n, Fn&& fn, Index min_chunk = 256) {
    const Index threads = std::min<Index>(thread_count(), std::max<Index>(1, n / std::max<Index>(min_chunk, 1)));
    if (threads <= 1) {
        fn(Index{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads) - 1);
    const Index chunk = (n + threads - 1) / threads;
    for (Index t = 1; t < threads; ++t) {
        const Index begin = t * chunk;
        const Index end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(Index{0}, std::min(n, chunk));
    for (auto& th : pool) th.join();
}

} // namespace gaeco

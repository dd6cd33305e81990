#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "heurlink/graph.hpp"

namespace heurlink {

// Thread-count resolution: an explicit request wins; 0 defers to the
// HEURLINK_THREADS environment variable; absent or invalid values fall
// back to 1. Single-threaded execution is the reproducibility reference.
inline int resolve_thread_count(int requested) {
    if (requested >= 1) return requested;
    if (const char* env = std::getenv("HEURLINK_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v <= 4096) return static_cast<int>(v);
    }
    return 1;
}

// Runs fn(begin, end) over a contiguous partition of [0, n). The chunk
// boundaries depend only on (n, threads), so results that are computed
// independently per row are identical for any fixed thread count.
template <typename Fn>
void parallel_for_rows(Index n, int threads, Fn&& fn) {
    threads = resolve_thread_count(threads);
    if (threads <= 1 || n < 2 * threads) {
        fn(Index{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const Index chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const Index begin = t * chunk;
        const Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace heurlink

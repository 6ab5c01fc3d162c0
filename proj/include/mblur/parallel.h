#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace mblur {

/// Runs fn(y) for y in [0, count) split into contiguous chunks across the
/// given number of worker threads. Every pass in the pipeline is a pure
/// per-row function of immutable inputs, so results are independent of the
/// worker count; workers <= 1 runs inline.
template <typename Fn>
void parallel_rows(int count, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers <= 1 || count <= 1) {
        for (int y = 0; y < count; ++y) fn(y);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int y0 = w * chunk;
        int y1 = std::min(count, y0 + chunk);
        if (y0 >= y1) break;
        pool.emplace_back([y0, y1, &fn] {
            for (int y = y0; y < y1; ++y) fn(y);
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace mblur

#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace resonet {

// Runs fn(begin, end) over a contiguous partition of [0, n) using up to
// n_threads workers. Callers must write disjoint outputs per index; under
// that contract results are bit-identical for every thread count.
template <typename F>
void parallel_chunks(std::size_t n, int n_threads, F&& fn) {
    if (n == 0) return;
    std::size_t workers = std::size_t(std::max(1, n_threads));
    workers = std::min(workers, n);
    if (workers == 1) {
        fn(std::size_t(0), n);
        return;
    }
    std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t b = w * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([b, e, &fn] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace resonet

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gfflab {

// Default worker count: GFFLAB_WORKERS, else hardware concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("GFFLAB_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Run `body(lo, hi, partial)` over fixed-size replica chunks on a worker
// pool and return the per-chunk partials in chunk order. Chunk boundaries do
// not depend on the worker count, and the caller merges partials in order,
// so results are identical for any number of workers.
template <class Part, class Body>
std::vector<Part> run_chunked(long replicas, int workers, long chunk_size, Body&& body) {
    if (chunk_size < 1) chunk_size = 1;
    const long nchunks = replicas > 0 ? (replicas + chunk_size - 1) / chunk_size : 0;
    std::vector<Part> parts(static_cast<size_t>(nchunks));
    if (nchunks == 0) return parts;
    if (workers < 1) workers = 1;
    if (workers > nchunks) workers = static_cast<int>(nchunks);

    std::atomic<long> next{0};
    auto work = [&] {
        for (;;) {
            long c = next.fetch_add(1);
            if (c >= nchunks) return;
            long lo = c * chunk_size;
            long hi = std::min(replicas, lo + chunk_size);
            body(lo, hi, parts[static_cast<size_t>(c)]);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return parts;
}

}  // namespace gfflab

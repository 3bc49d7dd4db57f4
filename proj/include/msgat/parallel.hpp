#pragma once

#include <thread>
#include <vector>

namespace msgat {

// Chunked parallel loop over [0, n). Each index writes only its own output
// slot and seeds its own generator, so results are identical for any thread
// count, including 1 (which runs inline).
template <typename Fn>
void parallel_for(long n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = static_cast<int>(std::min<long>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([w, workers, n, &fn]() {
            for (long i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace msgat

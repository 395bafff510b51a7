#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace chemosched {

// Runs f(0..n-1) on up to `threads` workers. Results must be slotted by index;
// callers own any ordering of reductions so thread count never changes output.
template <typename F>
void parallel_for(int n, int threads, F&& f) {
    if (threads > n) threads = n;
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace chemosched

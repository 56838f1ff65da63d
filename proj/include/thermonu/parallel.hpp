#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace thermonu {

/// Worker count: THERMONU_THREADS if set (>= 1), else hardware concurrency.
inline int thread_count() {
    if (const char* env = std::getenv("THERMONU_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Workers own disjoint contiguous ranges, so
/// writes to per-index output slots are race free and results do not depend
/// on the thread count. If any fn throws, the exception raised at the lowest
/// index is rethrown after all workers finish.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    const int threads =
        static_cast<int>(std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(n, 1)));
    if (threads <= 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    struct WorkerError {
        std::int64_t index = -1;
        std::exception_ptr error;
    };
    std::vector<WorkerError> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::int64_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = t * chunk;
        const std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &slot = errors[t]] {
            for (std::int64_t i = lo; i < hi; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    slot = {i, std::current_exception()};
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    const WorkerError* first = nullptr;
    for (const auto& e : errors)
        if (e.error && (first == nullptr || e.index < first->index)) first = &e;
    if (first) std::rethrow_exception(first->error);
}

}  // namespace thermonu

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace isoperiod {

/// Worker count: explicit request if positive, else hardware concurrency;
/// capped by ISOPERIOD_THREADS when set.
inline int resolve_workers(int requested = 0) {
    int n = requested > 0 ? requested : int(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("ISOPERIOD_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
}

/// Runs fn(i) for i in [0, count) on `workers` threads. Each index is
/// handled exactly once; results must be written to per-index slots so
/// the outcome does not depend on scheduling. The first exception is
/// rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, int(count));
    pool.reserve(std::size_t(n));
    for (int w = 0; w < n; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace isoperiod

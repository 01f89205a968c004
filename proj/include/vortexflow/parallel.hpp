#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace vflow {

// Thread budget: VORTEXFLOW_THREADS caps internal parallelism, 0 or unset
// means hardware concurrency. An override takes precedence (used by the
// determinism checks to pin 1 vs 8).
inline int& thread_override() {
    static int value = -1;  // -1: no override
    return value;
}

inline void set_thread_override(int n) { thread_override() = n; }

inline int thread_budget() {
    if (thread_override() > 0) return thread_override();
    if (const char* env = std::getenv("VORTEXFLOW_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n_items). Work items are claimed dynamically, but an
// item's identity never depends on the schedule, so any reduction keyed by i
// is schedule-independent.
template <typename Fn>
inline void parallel_for_index(std::size_t n_items, Fn&& fn) {
    const int threads = std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), n_items);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_items || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads - 1));
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace vflow

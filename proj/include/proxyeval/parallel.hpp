#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace proxyeval {

/// Worker count: PROXY_EVAL_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
inline unsigned thread_budget() {
    if (const char* env = std::getenv("PROXY_EVAL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs body(i) for i in [0, count) across the thread budget. Results
/// must go into preallocated slots; the first exception thrown by any
/// worker is rethrown on the calling thread after all workers join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_budget(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto run = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) threads.emplace_back(run);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace proxyeval

#pragma once

// Minimal deterministic work distribution: run fn(i) for i in [0, count)
// on up to `threads` workers pulling indices from a shared counter.  The
// schedule is nondeterministic, so fn must write only to its own
// preallocated slot; with per-index random substreams the results are
// then identical for every thread count.  The first exception thrown by
// any worker is rethrown after all workers join.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rset {

inline void parallel_for(uint64_t count, int threads,
                         const std::function<void(uint64_t)>& fn) {
    if (threads < 1) threads = 1;
    uint64_t workers = std::min<uint64_t>(uint64_t(threads), count);
    if (workers <= 1) {
        for (uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<uint64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint64_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace rset

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace procml {

/// Runs body(0..total-1) across up to `threads` workers.  Results must be
/// keyed by index, never by completion order; with threads <= 1 the loop is
/// inline, so single-threaded runs set the reference behavior.
inline void parallel_for(std::size_t total, int threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || total <= 1) {
        for (std::size_t i = 0; i < total; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total || failed.load())
                return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        }
    };

    const std::size_t count =
        std::min<std::size_t>(static_cast<std::size_t>(threads), total);
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (std::thread& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace procml

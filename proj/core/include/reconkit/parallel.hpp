#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace reconkit {

/// Runs body(i) for i in [0, count) on at most `limit` threads. Each index is
/// visited exactly once; the first exception thrown by any body is rethrown
/// after all workers have joined.
inline void parallel_for(std::size_t count, std::size_t limit,
                         const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(limit, 1, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace reconkit

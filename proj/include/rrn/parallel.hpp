#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rrn {

/// Process-wide worker count for embarrassingly parallel evaluation.
/// Results never depend on it: every task writes its own output slot.
void set_workers(int n);
int workers();

/// Calls fn(i) for i in [0, n). Exceptions from tasks are rethrown (the
/// first one captured) after all workers join.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers())), n);
    if (pool <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    threads.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace rrn

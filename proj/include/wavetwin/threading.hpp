#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace wavetwin {

/// Worker cap from WAVETWIN_THREADS: unset or 0 means one worker per
/// hardware thread; anything unparseable is a hard error, not a guess.
inline unsigned worker_count() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("WAVETWIN_THREADS");
    if (!env || !*env) return hw;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v > 1024)
        throw invalid_input("WAVETWIN_THREADS must be an integer in [0, 1024], got '" +
                            std::string(env) + "'");
    return v == 0 ? hw : static_cast<unsigned>(v);
}

/// Runs f(0) .. f(n-1) across up to `workers` threads (0 = WAVETWIN_THREADS
/// policy). Items are claimed from a shared counter, so uneven item costs
/// balance out. The first exception wins, stops further claims, and is
/// rethrown on the caller after all threads join.
template <typename F>
void parallel_for(std::size_t n, F&& f, unsigned workers = 0) {
    if (n == 0) return;
    if (workers == 0) workers = worker_count();
    if (static_cast<std::size_t>(workers) > n) workers = static_cast<unsigned>(n);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace wavetwin

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace segsweep {

// SEGSWEEP_THREADS caps the worker count; default is the available
// hardware parallelism.
inline std::size_t worker_count() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SEGSWEEP_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
        } catch (const std::exception&) {
        }
    }
    return n;
}

// Runs fn(i) for i in [0, count). The first exception thrown by any task is
// rethrown after all workers have stopped.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto run = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

} // namespace segsweep

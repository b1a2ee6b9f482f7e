#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace embeval::par {

inline int default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

inline int resolve_threads(int requested) {
    return requested <= 0 ? default_threads() : requested;
}

// Entities are processed on a fixed chunk grid so per-chunk partial results
// can be reduced in chunk order; parallel and serial runs then produce
// bit-identical sums regardless of thread count.
inline constexpr std::size_t kChunk = 1024;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

// Runs fn(task_index) for task_index in [0, n_tasks); tasks are claimed from a
// shared counter. The first exception thrown by any task is rethrown.
template <class Fn>
void for_each_task(std::size_t n_tasks, int threads, Fn&& fn) {
    if (n_tasks == 0) return;
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n_tasks)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
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
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Chunked variant over [0, n): fn(chunk_index, begin, end).
template <class Fn>
void for_each_chunk(std::size_t n, int threads, Fn&& fn) {
    const std::size_t chunks = chunk_count(n);
    for_each_task(chunks, threads, [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        fn(c, begin, end);
    });
}

}  // namespace embeval::par

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace patchdet {

/// Run fn(index) for every index in [0, count) on up to `workers` threads.
/// Indices are claimed from a shared counter; the first exception is captured
/// and rethrown on the calling thread after all workers finish. Callers own
/// any result storage (typically a pre-sized vector indexed by `index`), which
/// keeps output deterministic regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (count == 0)
        return;
    const std::size_t thread_count =
        std::min<std::size_t>(count, static_cast<std::size_t>(workers < 1 ? 1 : workers));
    if (thread_count == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t index = next.fetch_add(1, std::memory_order_relaxed);
            if (index >= count)
                return;
            try {
                fn(index);
            } catch (...) {
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t)
        threads.emplace_back(worker);
    for (auto& thread : threads)
        thread.join();
    if (error)
        std::rethrow_exception(error);
}

}  // namespace patchdet

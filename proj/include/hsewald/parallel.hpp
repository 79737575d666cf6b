#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hse {

/// Library-wide worker count; 1 gives the deterministic sequential mode.
int num_threads();
void set_num_threads(int n);

/// Calls body(begin, end) over contiguous blocks of [0, n). Results written
/// per index are independent of the thread count. The first exception thrown
/// by a worker is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body &&body, int threads = num_threads()) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n == 0 ? 1 : n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e)
            break;
        pool.emplace_back([&, b, e] {
            try {
                body(b, e);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace hse

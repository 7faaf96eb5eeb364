#include "mimosim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>
#include <vector>

namespace mimo {

void run_chunked(std::size_t n, std::size_t chunk_size, int workers,
                 const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (chunk_size == 0) throw std::invalid_argument("run_chunked: chunk_size must be > 0");
    if (n == 0) return;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    if (workers <= 0) workers = default_workers();

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * chunk_size;
        const std::size_t end = std::min(n, begin + chunk_size);
        fn(begin, end, c);
    };

    if (workers == 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            run_chunk(c);
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n_chunks);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace mimo

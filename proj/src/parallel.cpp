#include "gstein/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace gstein {

int worker_count() {
    if (const char* env = std::getenv("GSTEIN_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(std::size_t total, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
    const int workers = std::min<std::size_t>(worker_count(), n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

double parallel_sum(std::size_t total, std::size_t chunk_size,
                    const std::function<double(std::size_t)>& fn) {
    if (total == 0) return 0.0;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_chunks(total, chunk_size, [&](std::size_t c, std::size_t b, std::size_t e) {
        KahanSum acc;
        for (std::size_t i = b; i < e; ++i) acc.add(fn(i));
        partial[c] = acc.value();
    });
    KahanSum acc;
    for (double v : partial) acc.add(v);
    return acc.value();
}

}  // namespace gstein

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gstein {

// Worker count: GSTEIN_THREADS if set, otherwise hardware concurrency.
int worker_count();

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, total).
// Chunk boundaries depend only on (total, chunk_size), never on the worker
// count, so per-chunk results can be merged in chunk order to give outputs
// that are independent of threading.
void parallel_chunks(std::size_t total, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Ordered-merge sum of fn over [0, total): each chunk is accumulated with
// Neumaier compensation and chunk sums are combined in index order.
double parallel_sum(std::size_t total, std::size_t chunk_size,
                    const std::function<double(std::size_t)>& fn);

// Compensated (Neumaier) accumulator.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) noexcept {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + comp; }
};

}  // namespace gstein

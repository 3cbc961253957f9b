#pragma once

/*
 * Deterministic floating-point reductions.
 *
 * Every big sum in this library (Lp norms, edge energies, pairwise kernel
 * sums) goes through the helpers below.  The iteration space is cut into
 * fixed-size blocks; each block is accumulated sequentially and the block
 * partials are combined with a pairwise tree whose shape depends only on the
 * block count.  Results are therefore bit-identical across reruns and
 * independent of how many worker threads evaluate the blocks, and the
 * pairwise tree keeps rounding error at O(log n) instead of O(n).
 */

#include <cstddef>
#include <thread>
#include <vector>

namespace mixedeig {

// Pairwise-tree sum of a contiguous array. Association is fixed by n alone.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

namespace detail {
constexpr std::size_t kReductionBlock = 4096;
}

// Sums f(i) for i in [0, n). f must be pure. Deterministic association.
template <class F>
double block_sum(std::size_t n, F&& f) {
    const std::size_t nb = (n + detail::kReductionBlock - 1) / detail::kReductionBlock;
    if (nb <= 1) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += f(i);
        return acc;
    }
    std::vector<double> partial(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * detail::kReductionBlock;
        const std::size_t hi = std::min(n, lo + detail::kReductionBlock);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += f(i);
        partial[b] = acc;
    }
    return pairwise_sum(partial);
}

// Same contract as block_sum; blocks may be evaluated by `threads` workers.
// The partial-sum layout is identical for every thread count, so the result
// is bit-stable regardless of scheduling.
template <class F>
double block_sum_parallel(std::size_t n, int threads, F&& f) {
    const std::size_t nb = (n + detail::kReductionBlock - 1) / detail::kReductionBlock;
    if (threads <= 1 || nb < 4) return block_sum(n, f);

    std::vector<double> partial(nb, 0.0);
    const int nw = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), nb));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t b = static_cast<std::size_t>(w); b < nb; b += static_cast<std::size_t>(nw)) {
                const std::size_t lo = b * detail::kReductionBlock;
                const std::size_t hi = std::min(n, lo + detail::kReductionBlock);
                double acc = 0.0;
                for (std::size_t i = lo; i < hi; ++i) acc += f(i);
                partial[b] = acc;
            }
        });
    }
    for (auto& t : pool) t.join();
    return pairwise_sum(partial);
}

} // namespace mixedeig

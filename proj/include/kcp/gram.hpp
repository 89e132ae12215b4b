#pragma once

#include <cstddef>
#include <vector>

#include "kcp/errors.hpp"
#include "kcp/kernel.hpp"
#include "kcp/segmentation.hpp"
#include "kcp/series.hpp"
#include "kcp/threading.hpp"

namespace kcp {

/// The n x n kernel matrix K_ij = k(X_i, X_j) plus cumulative structures that
/// answer diagonal and block sums over any segment in O(1). Memory is about
/// two n x n double buffers (entries + 2-D prefix sums), ~16 n^2 bytes.
///
/// Segments are addressed by boundary pairs (a, b) with 0 <= a < b <= n,
/// meaning observations {a+1, ..., b} (0-based rows [a, b)).
class GramMatrix {
public:
    static GramMatrix build(const KernelSpec& spec, const Series& series,
                            unsigned threads = worker_thread_count()) {
        if (series.n < 2)
            throw invalid_input("gram matrix requires n >= 2");
        validate(spec);
        if (spec.median_bandwidth)
            throw invalid_input("gram matrix: resolve the median bandwidth sentinel first");

        GramMatrix g;
        const std::size_t n = series.n;
        g.n_ = n;
        g.entries_.assign(n * n, 0.0);
        if (threads < 1) threads = 1;

        // Each unordered pair is evaluated once and mirrored, so the matrix
        // is exactly symmetric. Rows are distributed round-robin; every cell
        // is written by exactly one worker, making the result independent of
        // the thread count.
        parallel_for(
            std::min<std::size_t>(threads, n),
            [&](std::size_t t) {
                for (std::size_t i = t; i < n; i += threads) {
                    const auto xi = series.row(i);
                    for (std::size_t j = i; j < n; ++j) {
                        const double v = eval(spec, xi, series.row(j));
                        g.entries_[i * n + j] = v;
                        g.entries_[j * n + i] = v;
                    }
                }
            },
            threads);

        g.diag_prefix_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            g.diag_prefix_[i + 1] = g.diag_prefix_[i] + g.entries_[i * n + i];

        // block_prefix_[i * (n+1) + j] = sum_{p < i, q < j} K_pq
        g.block_prefix_.assign((n + 1) * (n + 1), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double row_cum = 0.0;
            const double* row = g.entries_.data() + i * n;
            const double* above = g.block_prefix_.data() + i * (n + 1);
            double* below = g.block_prefix_.data() + (i + 1) * (n + 1);
            for (std::size_t j = 0; j < n; ++j) {
                row_cum += row[j];
                below[j + 1] = above[j + 1] + row_cum;
            }
        }

        g.zero_tol_ = 1e-9 * g.trace();
        return g;
    }

    std::size_t size() const { return n_; }

    double at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    double trace() const { return diag_prefix_[n_]; }

    double max_diag() const {
        double m = entries_.empty() ? 0.0 : entries_[0];
        for (std::size_t i = 1; i < n_; ++i)
            m = std::max(m, entries_[i * n_ + i]);
        return m;
    }

    /// Sum of K_ii over the segment {a+1..b}.
    double diag_sum(std::size_t a, std::size_t b) const {
        check_range(a, b);
        return diag_prefix_[b] - diag_prefix_[a];
    }

    /// Sum of K_ij over i, j both in the segment {a+1..b}.
    double block_sum(std::size_t a, std::size_t b) const {
        check_range(a, b);
        const std::size_t w = n_ + 1;
        return block_prefix_[b * w + b] - block_prefix_[a * w + b] -
               block_prefix_[b * w + a] + block_prefix_[a * w + a];
    }

    /// Contribution of segment {a+1..b} to n * empirical risk:
    /// sum_i K_ii - (1/len) sum_ij K_ij. Nonnegative for a PSD kernel;
    /// values within rounding noise of zero are clamped to 0.
    double segment_cost(std::size_t a, std::size_t b) const {
        check_range(a, b);
        const std::size_t len = b - a;
        if (len == 1) return 0.0;
        const double cost =
            diag_sum(a, b) - block_sum(a, b) / static_cast<double>(len);
        if (cost < 0.0 && cost >= -zero_tol_) return 0.0;
        return cost;
    }

private:
    void check_range(std::size_t a, std::size_t b) const {
        if (a >= b || b > n_)
            throw invalid_input("gram matrix: segment indices out of range");
    }

    std::size_t n_ = 0;
    std::vector<double> entries_;
    std::vector<double> diag_prefix_;
    std::vector<double> block_prefix_;
    double zero_tol_ = 0.0;
};

inline GramMatrix build_gram(const KernelSpec& spec, const Series& series) {
    return GramMatrix::build(spec, series);
}

/// Empirical risk of a segmentation: (1/n) sum of segment costs.
inline double empirical_risk(const GramMatrix& gram, const Segmentation& tau) {
    if (tau.n() != gram.size())
        throw invalid_input("empirical risk: segmentation does not end at n");
    double total = 0.0;
    for (std::size_t l = 0; l < tau.num_segments(); ++l)
        total += gram.segment_cost(tau.segment_begin(l), tau.segment_end(l));
    return total / static_cast<double>(gram.size());
}

}  // namespace kcp

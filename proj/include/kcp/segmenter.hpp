#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kcp/errors.hpp"
#include "kcp/gram.hpp"
#include "kcp/segmentation.hpp"

namespace kcp {

/// Linear penalty pen(tau) = c * m_squared * D_tau / n.
struct PenaltySpec {
    double c = 1.0;
    double m_squared = 1.0;
};

struct RiskProfileEntry {
    std::size_t d = 0;
    double risk = 0.0;  // minimal empirical risk over segmentations with d segments
    Segmentation segmentation;
};

/// Minimal empirical risks and argmin segmentations for every d = 1..d_max,
/// all segments at least min_seg_len long.
struct RiskProfile {
    std::size_t n = 0;
    std::size_t min_seg_len = 1;
    std::vector<RiskProfileEntry> per_d;  // ascending d, per_d[i].d == i + 1

    const RiskProfileEntry& entry(std::size_t d) const {
        if (d < 1 || d > per_d.size())
            throw invalid_input("risk profile: no entry for d = " + std::to_string(d));
        return per_d[d - 1];
    }
};

namespace detail {

// Bellman recursion over (number of segments, last boundary). best[d][b] is
// the minimal sum of segment costs for observations {1..b} split into d
// segments of length >= min_len. On near-equal candidates (1e-12 relative)
// the later change-point wins, so results are deterministic.
inline RiskProfile solve_dp(const GramMatrix& gram, std::size_t d_max,
                            std::size_t min_len) {
    const std::size_t n = gram.size();
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
    // parent[d][b]: optimal previous boundary for d segments ending at b
    std::vector<std::vector<std::uint32_t>> parent(
        d_max + 1, std::vector<std::uint32_t>(n + 1, 0));

    RiskProfile profile;
    profile.n = n;
    profile.min_seg_len = min_len;
    profile.per_d.reserve(d_max);

    auto backtrack = [&](std::size_t d) {
        std::vector<std::size_t> bounds(d + 1);
        bounds[d] = n;
        std::size_t b = n;
        for (std::size_t layer = d; layer >= 2; --layer) {
            b = parent[layer][b];
            bounds[layer - 1] = b;
        }
        bounds[0] = 0;
        return Segmentation(std::move(bounds));
    };

    for (std::size_t b = min_len; b <= n; ++b)
        prev[b] = gram.segment_cost(0, b);
    profile.per_d.push_back(
        {1, prev[n] / static_cast<double>(n), Segmentation::trivial(n)});

    for (std::size_t d = 2; d <= d_max; ++d) {
        std::fill(cur.begin(), cur.end(), inf);
        for (std::size_t b = d * min_len; b <= n; ++b) {
            double best = inf;
            std::size_t arg = 0;
            for (std::size_t t = (d - 1) * min_len; t + min_len <= b; ++t) {
                if (prev[t] == inf) continue;
                const double val = prev[t] + gram.segment_cost(t, b);
                if (best == inf) {
                    best = val;
                    arg = t;
                    continue;
                }
                const double tol = 1e-12 * std::max(1.0, std::abs(best));
                if (val < best - tol) {
                    best = val;
                    arg = t;
                } else if (val <= best + tol) {
                    arg = t;  // tie: prefer the later change-point
                    best = std::min(best, val);
                }
            }
            cur[b] = best;
            parent[d][b] = static_cast<std::uint32_t>(arg);
        }
        std::swap(prev, cur);
        profile.per_d.push_back({d, prev[n] / static_cast<double>(n), backtrack(d)});
    }
    return profile;
}

}  // namespace detail

/// Exact minimal empirical risk for every number of segments d = 1..d_max,
/// restricted to segments of length >= min_seg_len. O(n^2 d_max) time.
inline RiskProfile solve_all_d(const GramMatrix& gram, std::size_t d_max,
                               std::size_t min_seg_len = 1) {
    const std::size_t n = gram.size();
    if (min_seg_len < 1) min_seg_len = 1;
    if (d_max < 1 || d_max * min_seg_len > n)
        throw infeasible("solve_all_d: d_max = " + std::to_string(d_max) +
                         " infeasible with min_seg_len = " +
                         std::to_string(min_seg_len) + " and n = " +
                         std::to_string(n));
    return detail::solve_dp(gram, d_max, min_seg_len);
}

/// Penalized selection: argmin_d { r_d + c * m_squared * d / n }, ties broken
/// toward smaller d.
inline const RiskProfileEntry& select_penalized(const RiskProfile& profile,
                                                const PenaltySpec& pen,
                                                std::size_t n) {
    if (profile.per_d.empty())
        throw invalid_input("select_penalized: empty risk profile");
    const RiskProfileEntry* best = nullptr;
    double best_crit = std::numeric_limits<double>::infinity();
    for (const auto& entry : profile.per_d) {
        const double crit = entry.risk + pen.c * pen.m_squared *
                                             static_cast<double>(entry.d) /
                                             static_cast<double>(n);
        if (crit < best_crit) {
            best_crit = crit;
            best = &entry;
        }
    }
    return *best;
}

/// Minimal-length constraint of the fixed-D estimator: segments must hold at
/// least ceil(n * delta_n) observations (at least one).
inline std::size_t min_length_from_delta(std::size_t n, double delta_n) {
    if (delta_n < 0.0) throw invalid_input("delta_n must be nonnegative");
    const double raw = static_cast<double>(n) * delta_n;
    const auto len = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::max<std::size_t>(1, len);
}

/// Exact minimizer of the empirical risk among segmentations with exactly d
/// segments, each of length >= ceil(n * delta_n).
inline Segmentation solve_fixed_d(const GramMatrix& gram, std::size_t d,
                                  double delta_n) {
    const std::size_t n = gram.size();
    const std::size_t min_len = min_length_from_delta(n, delta_n);
    if (d < 1 || d * min_len > n)
        throw infeasible("solve_fixed_d: d = " + std::to_string(d) +
                         " with minimal segment length " +
                         std::to_string(min_len) + " is infeasible for n = " +
                         std::to_string(n));
    return detail::solve_dp(gram, d, min_len).per_d.back().segmentation;
}

/// 60 log-spaced penalty constants over [1e-3, 1e3].
inline std::vector<double> default_c_grid() {
    std::vector<double> grid(60);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) /
                                      static_cast<double>(grid.size() - 1));
    return grid;
}

/// Selected dimension for every grid value (nonincreasing in c).
inline std::vector<std::size_t> dimension_path(const RiskProfile& profile,
                                               double m_squared, std::size_t n,
                                               std::span<const double> c_grid) {
    std::vector<std::size_t> dhat(c_grid.size());
    for (std::size_t k = 0; k < c_grid.size(); ++k)
        dhat[k] = select_penalized(profile, {c_grid[k], m_squared}, n).d;
    return dhat;
}

/// Dimension-jump calibration of the penalty constant: sweep the grid, find
/// the largest drop of c -> D_hat(c), and return twice the grid value at
/// which the post-jump dimension is first attained. A flat dimension path
/// means the data carry no usable jump and raises an error.
inline double calibrate_c(const RiskProfile& profile, double m_squared,
                          std::size_t n, std::span<const double> c_grid) {
    if (c_grid.size() < 20)
        throw invalid_input("calibrate_c: grid needs at least 20 points");
    for (std::size_t k = 0; k < c_grid.size(); ++k) {
        if (!(c_grid[k] > 0.0))
            throw invalid_input("calibrate_c: grid values must be positive");
        if (k > 0 && !(c_grid[k] > c_grid[k - 1]))
            throw invalid_input("calibrate_c: grid must be strictly increasing");
    }
    if (c_grid.back() / c_grid.front() < 999.999)
        throw invalid_input("calibrate_c: grid must span at least 3 orders of magnitude");

    const std::vector<std::size_t> dhat =
        dimension_path(profile, m_squared, n, c_grid);
    std::size_t best_drop = 0;
    std::size_t jump_index = 0;
    for (std::size_t k = 0; k + 1 < dhat.size(); ++k) {
        const std::size_t drop = dhat[k] > dhat[k + 1] ? dhat[k] - dhat[k + 1] : 0;
        if (drop > best_drop) {
            best_drop = drop;
            jump_index = k + 1;
        }
    }
    if (best_drop == 0)
        throw infeasible("calibrate_c: selected dimension is constant over the "
                         "grid (uninformative data or grid)");
    return 2.0 * c_grid[jump_index];
}

struct PenaltyWindowDiagnostics {
    double c_min = 0.0;
    double c_max = 0.0;
    double v1 = 0.0;
};

/// Penalty-window and localization-rate quantities of the main consistency
/// theorem, reported verbatim (the constants may be pessimistic in practice).
inline PenaltyWindowDiagnostics penalty_window_diagnostics(
    std::size_t d_star, double lambda_min, double delta_min, double m_squared,
    std::size_t n, double y) {
    if (d_star < 1 || !(lambda_min > 0.0) || !(delta_min > 0.0) ||
        !(m_squared > 0.0) || n < 1 || y < 0.0)
        throw invalid_input("penalty_window_diagnostics: inputs must be positive");
    const double nn = static_cast<double>(n);
    const double ds = static_cast<double>(d_star);
    const double log_term = y + std::log(nn) + 1.0;
    const double delta_sq = delta_min * delta_min;
    PenaltyWindowDiagnostics out;
    out.c_min = (74.0 / 3.0) * (ds + 1.0) * log_term;
    out.c_max = (delta_sq / m_squared) * (lambda_min * nn) / (6.0 * ds);
    out.v1 = (148.0 * ds * m_squared / delta_sq) * (log_term / nn);
    return out;
}

/// Localization bound of the fixed-D, finite-variance result:
/// v2(y, delta_n) = 24 D*^2 (Dbar sqrt(V) / Dmin^2) y / sqrt(n)
///                +  8 D*   (V / Dmin^2) y^2 / (n delta_n).
inline double fixed_d_localization_bound(std::size_t d_star, double delta_max,
                                         double delta_min, double v_bound,
                                         std::size_t n, double y,
                                         double delta_n) {
    if (d_star < 1 || !(delta_max > 0.0) || !(delta_min > 0.0) ||
        !(v_bound > 0.0) || n < 1 || !(y > 0.0) || !(delta_n > 0.0))
        throw invalid_input("fixed_d_localization_bound: inputs must be positive");
    const double nn = static_cast<double>(n);
    const double ds = static_cast<double>(d_star);
    const double delta_sq = delta_min * delta_min;
    return 24.0 * ds * ds * (delta_max * std::sqrt(v_bound) / delta_sq) *
               (y / std::sqrt(nn)) +
           8.0 * ds * (v_bound / delta_sq) * (y * y / (nn * delta_n));
}

}  // namespace kcp

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kcp/errors.hpp"
#include "kcp/metrics.hpp"
#include "kcp/rng.hpp"
#include "kcp/segmentation.hpp"

namespace kcp {

/// A piecewise-constant mean signal mu*_1..mu*_n in R^dim together with the
/// true segmentation it induces (maximal runs of exactly equal vectors).
struct MeanSignal {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> values;  // n * dim, row-major
    Segmentation true_tau;

    static MeanSignal from_values(std::size_t n, std::size_t dim,
                                  std::vector<double> values) {
        if (values.size() != n * dim || n == 0 || dim == 0)
            throw invalid_input("mean signal: values size does not match n * dim");
        MeanSignal mu;
        mu.n = n;
        mu.dim = dim;
        mu.values = std::move(values);
        std::vector<std::size_t> bounds{0};
        for (std::size_t i = 1; i < n; ++i) {
            bool equal = true;
            for (std::size_t j = 0; j < dim; ++j)
                if (mu.values[i * dim + j] != mu.values[(i - 1) * dim + j]) {
                    equal = false;
                    break;
                }
            if (!equal) bounds.push_back(i);
        }
        bounds.push_back(n);
        mu.true_tau = Segmentation(std::move(bounds));
        return mu;
    }

    static MeanSignal scalar(std::vector<double> values) {
        const std::size_t n = values.size();
        return from_values(n, 1, std::move(values));
    }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

/// A realization of the noise eps_1..eps_n with per-index variances
/// v_j = E ||eps_j||^2 known analytically for the generator used.
struct NoiseSample {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> values;     // n * dim
    std::vector<double> variances;  // length n

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }

    double variance_sum() const {
        double s = 0.0;
        for (double v : variances) s += v;
        return s;
    }
};

/// I.i.d. N(0, sigma^2 I_dim) noise; v_j = dim * sigma^2.
inline NoiseSample gaussian_noise(RandomSource& rng, std::size_t n,
                                  std::size_t dim, double sigma = 1.0) {
    NoiseSample eps;
    eps.n = n;
    eps.dim = dim;
    eps.values.resize(n * dim);
    for (auto& v : eps.values) v = sigma * rng.normal();
    eps.variances.assign(n, static_cast<double>(dim) * sigma * sigma);
    return eps;
}

namespace detail {

/// Per-segment means of a row-major (n x dim) array under tau; D x dim.
inline std::vector<double> segment_means(const std::vector<double>& values,
                                         std::size_t n, std::size_t dim,
                                         const Segmentation& tau) {
    if (tau.n() != n)
        throw invalid_input("segment_means: segmentation does not match length");
    std::vector<double> means(tau.num_segments() * dim, 0.0);
    for (std::size_t l = 0; l < tau.num_segments(); ++l) {
        const std::size_t a = tau.segment_begin(l);
        const std::size_t b = tau.segment_end(l);
        for (std::size_t i = a; i < b; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                means[l * dim + j] += values[i * dim + j];
        const double inv = 1.0 / static_cast<double>(b - a);
        for (std::size_t j = 0; j < dim; ++j) means[l * dim + j] *= inv;
    }
    return means;
}

inline double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

/// values minus their per-segment means. Each segment is shifted by its first
/// row before averaging, so segments of exactly equal rows produce exact
/// zeros (this keeps A and L exactly 0 at the true segmentation).
inline std::vector<double> centered_residuals(const std::vector<double>& values,
                                              std::size_t n, std::size_t dim,
                                              const Segmentation& tau) {
    if (tau.n() != n)
        throw invalid_input("centered_residuals: segmentation does not match length");
    std::vector<double> out(n * dim);
    for (std::size_t l = 0; l < tau.num_segments(); ++l) {
        const std::size_t a = tau.segment_begin(l);
        const std::size_t b = tau.segment_end(l);
        for (std::size_t j = 0; j < dim; ++j) {
            const double base = values[a * dim + j];
            double sum = 0.0;
            for (std::size_t i = a; i < b; ++i) {
                const double delta = values[i * dim + j] - base;
                out[i * dim + j] = delta;
                sum += delta;
            }
            const double mean = sum / static_cast<double>(b - a);
            for (std::size_t i = a; i < b; ++i) out[i * dim + j] -= mean;
        }
    }
    return out;
}

}  // namespace detail

struct JumpStats {
    double delta_min = 0.0;  // smallest jump between consecutive segment means
    double delta_max = 0.0;  // largest jump
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

inline JumpStats jump_stats(const MeanSignal& mu) {
    const Segmentation& tau = mu.true_tau;
    if (tau.num_segments() < 2)
        throw invalid_input("jump_stats: constant mean signal has no jumps");
    JumpStats s;
    s.delta_min = std::numeric_limits<double>::infinity();
    s.delta_max = 0.0;
    for (std::size_t l = 0; l + 1 < tau.num_segments(); ++l) {
        // value on a segment is the row at its first index
        const auto a = mu.row(tau.segment_begin(l));
        const auto b = mu.row(tau.segment_begin(l + 1));
        double d2 = 0.0;
        for (std::size_t j = 0; j < mu.dim; ++j) {
            const double d = a[j] - b[j];
            d2 += d * d;
        }
        const double jump = std::sqrt(d2);
        s.delta_min = std::min(s.delta_min, jump);
        s.delta_max = std::max(s.delta_max, jump);
    }
    s.lambda_min = tau.lambda_min();
    s.lambda_max = tau.lambda_max();
    return s;
}

/// Approximation error A_tau = || mu* - Pi_tau mu* ||^2; exactly 0 whenever
/// mu* is constant on every segment of tau.
inline double approx_error(const MeanSignal& mu, const Segmentation& tau) {
    if (tau.n() != mu.n)
        throw invalid_input("approx_error: length mismatch");
    const auto residuals =
        detail::centered_residuals(mu.values, mu.n, mu.dim, tau);
    double total = 0.0;
    for (const double r : residuals) total += r * r;
    return total;
}

/// Terms of the risk decomposition on one realization:
/// A = ||mu* - Pi mu*||^2, L = <mu* - Pi mu*, eps>, Q = ||Pi eps||^2,
/// psi = 2L - Q + A; the identity ||Y - Pi Y||^2 = A + 2L - Q + ||eps||^2
/// (Y = mu* + eps) is verified to 1e-9 relative.
struct Decomposition {
    double a = 0.0;
    double l = 0.0;
    double q = 0.0;
    double psi = 0.0;
    double identity_residual = 0.0;  // relative
    bool identity_ok = false;
};

inline Decomposition decomposition_terms(const MeanSignal& mu,
                                         const NoiseSample& noise,
                                         const Segmentation& tau) {
    if (mu.n != noise.n || mu.dim != noise.dim || tau.n() != mu.n)
        throw invalid_input("decomposition_terms: inconsistent lengths");
    const std::size_t n = mu.n;
    const std::size_t dim = mu.dim;
    Decomposition out;
    out.a = approx_error(mu, tau);

    const auto mu_residuals =
        detail::centered_residuals(mu.values, n, dim, tau);
    double eps_sq = 0.0;
    for (std::size_t l = 0; l < tau.num_segments(); ++l) {
        const std::size_t a = tau.segment_begin(l);
        const std::size_t b = tau.segment_end(l);
        std::vector<double> eps_sum(dim, 0.0);
        for (std::size_t i = a; i < b; ++i)
            for (std::size_t j = 0; j < dim; ++j) {
                const double e = noise.values[i * dim + j];
                eps_sum[j] += e;
                eps_sq += e * e;
                out.l += mu_residuals[i * dim + j] * e;
            }
        double s2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s2 += eps_sum[j] * eps_sum[j];
        out.q += s2 / static_cast<double>(b - a);
    }
    out.psi = 2.0 * out.l - out.q + out.a;

    // direct ||Y - Pi Y||^2 with Y = mu* + eps
    std::vector<double> y(n * dim);
    for (std::size_t i = 0; i < n * dim; ++i)
        y[i] = mu.values[i] + noise.values[i];
    const auto y_means = detail::segment_means(y, n, dim, tau);
    double direct = 0.0;
    for (std::size_t l = 0; l < tau.num_segments(); ++l)
        for (std::size_t i = tau.segment_begin(l); i < tau.segment_end(l); ++i)
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = y[i * dim + j] - y_means[l * dim + j];
                direct += d * d;
            }
    const double rhs = out.a + 2.0 * out.l - out.q + eps_sq;
    out.identity_residual =
        std::abs(direct - rhs) / std::max(1.0, std::abs(direct));
    out.identity_ok = out.identity_residual <= 1e-9;
    return out;
}

/// Lower bounds on the approximation error, evaluated on a concrete pair:
/// under-segmentation (only when D_tau < D_star): (1/n) A_tau >= lambda_min* delta_min^2 / 2
/// general (when d_inf_1(tau*, tau) is defined):
///        (1/n) A_tau >= min{lambda_min*, (1/n) d_inf_1(tau*, tau)} delta_min^2 / 2
struct ApproxBoundsReport {
    bool under_seg_applicable = false;
    bool under_seg_ok = true;
    double under_seg_slack = 0.0;
    bool general_applicable = false;
    bool general_ok = true;
    double general_slack = 0.0;
};

inline ApproxBoundsReport check_approx_bounds(const MeanSignal& mu,
                                              const Segmentation& tau) {
    if (mu.true_tau.num_segments() < 2)
        throw invalid_input("check_approx_bounds: needs at least one true jump");
    if (tau.n() != mu.n)
        throw invalid_input("check_approx_bounds: length mismatch");
    const JumpStats stats = jump_stats(mu);
    const double lhs = approx_error(mu, tau) / static_cast<double>(mu.n);
    const double delta_sq = stats.delta_min * stats.delta_min;

    ApproxBoundsReport r;
    r.under_seg_applicable = tau.num_segments() < mu.true_tau.num_segments();
    if (r.under_seg_applicable) {
        const double rhs = 0.5 * stats.lambda_min * delta_sq;
        r.under_seg_slack = lhs - rhs;
        r.under_seg_ok = r.under_seg_slack >= -1e-12 * std::max(1.0, rhs);
    }
    r.general_applicable = tau.num_segments() >= 2;
    if (r.general_applicable) {
        const double eps = static_cast<double>(d_inf_1(mu.true_tau, tau)) /
                           static_cast<double>(mu.n);
        const double rhs = 0.5 * std::min(stats.lambda_min, eps) * delta_sq;
        r.general_slack = lhs - rhs;
        r.general_ok = r.general_slack >= -1e-12 * std::max(1.0, rhs);
    }
    return r;
}

/// M_n = max_k || sum_{j<=k} eps_j || and the exhaustive inner-segment
/// maximum max_{a<b} || sum_{j=a..b} eps_j ||, which satisfies
/// max/2 <= M_n deterministically.
struct PartialSumReport {
    double m_n = 0.0;
    double max_segment_norm = 0.0;
    bool bound_ok = true;
};

inline PartialSumReport check_partial_sums(const NoiseSample& noise) {
    const std::size_t n = noise.n;
    const std::size_t dim = noise.dim;
    if (n < 1) throw invalid_input("check_partial_sums: empty noise");
    std::vector<double> prefix((n + 1) * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            prefix[(i + 1) * dim + j] =
                prefix[i * dim + j] + noise.values[i * dim + j];

    PartialSumReport r;
    for (std::size_t k = 1; k <= n; ++k)
        r.m_n = std::max(
            r.m_n, std::sqrt(detail::squared_norm(
                       {prefix.data() + k * dim, dim})));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b <= n; ++b) {
            double s2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = prefix[b * dim + j] - prefix[a * dim + j];
                s2 += d * d;
            }
            r.max_segment_norm = std::max(r.max_segment_norm, std::sqrt(s2));
        }
    r.bound_ok =
        0.5 * r.max_segment_norm <= r.m_n + 1e-12 * std::max(1.0, r.m_n);
    return r;
}

inline double max_partial_sum(const NoiseSample& noise) {
    const PartialSumReport r = check_partial_sums(noise);
    if (!r.bound_ok)
        throw std::logic_error("partial-sum bound violated; numerical corruption");
    return r.m_n;
}

/// Monte-Carlo check of the Kolmogorov-type tail bound
/// P(M_n >= x) <= (sum_j v_j) / x^2 for i.i.d. N(0, sigma^2 I_dim) noise.
/// Passes when the one-sided 99% binomial upper confidence bound on the
/// exceedance probability stays below the theoretical bound.
struct KolmogorovReport {
    double x = 0.0;
    std::size_t trials = 0;
    std::size_t exceed_count = 0;
    double empirical = 0.0;
    double upper_confidence = 0.0;
    double bound = 0.0;
    bool passed = false;
};

inline double wilson_upper_bound99(std::size_t count, std::size_t trials) {
    const double z = 2.3263478740408408;  // one-sided 99% normal quantile
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(count) / nn;
    const double z2 = z * z;
    return (p + z2 / (2.0 * nn) +
            z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn))) /
           (1.0 + z2 / nn);
}

inline KolmogorovReport check_kolmogorov(std::size_t n, std::size_t dim,
                                         double sigma, double x,
                                         std::size_t trials,
                                         std::uint64_t seed) {
    if (trials < 10000)
        throw invalid_input("check_kolmogorov: at least 1e4 trials required");
    if (!(x > 0.0)) throw invalid_input("check_kolmogorov: x must be positive");
    KolmogorovReport r;
    r.x = x;
    r.trials = trials;
    r.bound = static_cast<double>(n) * static_cast<double>(dim) * sigma * sigma /
              (x * x);
    std::vector<double> sum(dim);
    for (std::size_t t = 0; t < trials; ++t) {
        RandomSource rng(mix_seed(seed, 0x4B4F4C4Dull, t));
        std::fill(sum.begin(), sum.end(), 0.0);
        double m2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                sum[j] += sigma * rng.normal();
                s2 += sum[j] * sum[j];
            }
            m2 = std::max(m2, s2);
        }
        if (m2 >= x * x) ++r.exceed_count;
    }
    r.empirical = static_cast<double>(r.exceed_count) / static_cast<double>(trials);
    r.upper_confidence = wilson_upper_bound99(r.exceed_count, trials);
    r.passed = r.upper_confidence <= r.bound + 1e-12;
    return r;
}

/// Deterministic bounds on the linear and quadratic noise terms:
/// |L_tau| <= 6 D* max{D*, D_tau} delta_max M_n
/// Q_tau   <= 4 D_tau M_n^2 / (n lambda_min(tau))
struct NoiseTermReport {
    double l_value = 0.0;
    double l_bound = 0.0;
    bool l_ok = true;
    double q_value = 0.0;
    double q_bound = 0.0;
    bool q_ok = true;
};

inline NoiseTermReport check_noise_term_bounds(const MeanSignal& mu, const NoiseSample& noise,
                                 const Segmentation& tau) {
    if (mu.true_tau.num_segments() < 2)
        throw invalid_input("check_noise_term_bounds: needs at least one true jump");
    const Decomposition dec = decomposition_terms(mu, noise, tau);
    const JumpStats stats = jump_stats(mu);
    const double m_n = max_partial_sum(noise);
    const double d_star = static_cast<double>(mu.true_tau.num_segments());
    const double d_tau = static_cast<double>(tau.num_segments());

    NoiseTermReport r;
    r.l_value = std::abs(dec.l);
    r.l_bound = 6.0 * d_star * std::max(d_star, d_tau) * stats.delta_max * m_n;
    r.l_ok = r.l_value <= r.l_bound + 1e-9 * std::max(1.0, r.l_bound);
    r.q_value = dec.q;
    r.q_bound = 4.0 * d_tau * m_n * m_n /
                (static_cast<double>(mu.n) * tau.lambda_min());
    r.q_ok = r.q_value <= r.q_bound + 1e-9 * std::max(1.0, r.q_bound);
    return r;
}

// ---------------------------------------------------------------------------
// Randomized instances
// ---------------------------------------------------------------------------

/// Uniformly drawn boundaries (rejection sampling) with d segments of length
/// at least min_len.
inline Segmentation random_segmentation(RandomSource& rng, std::size_t n,
                                        std::size_t d, std::size_t min_len = 1) {
    if (d < 1 || d * min_len > n)
        throw invalid_input("random_segmentation: infeasible (n, d, min_len)");
    if (d == 1) return Segmentation::trivial(n);
    std::vector<std::size_t> inner(d - 1);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (auto& v : inner) v = 1 + rng.below(n - 1);
        std::sort(inner.begin(), inner.end());
        bool ok = inner[0] >= min_len && n - inner[d - 2] >= min_len;
        for (std::size_t i = 0; ok && i + 1 < inner.size(); ++i)
            ok = inner[i + 1] - inner[i] >= min_len;
        if (!ok) continue;
        std::vector<std::size_t> bounds;
        bounds.reserve(d + 1);
        bounds.push_back(0);
        bounds.insert(bounds.end(), inner.begin(), inner.end());
        bounds.push_back(n);
        return Segmentation(std::move(bounds));
    }
    // dense fallback: evenly spaced
    std::vector<std::size_t> bounds(d + 1);
    for (std::size_t i = 0; i <= d; ++i) bounds[i] = i * n / d;
    return Segmentation(std::move(bounds));
}

/// Random piecewise-constant signal: 2..6 segments (capped by n/2), segment
/// boundaries at least 2 apart, i.i.d. standard normal segment values redrawn
/// until every consecutive jump exceeds 1e-6.
inline MeanSignal random_mean_signal(RandomSource& rng, std::size_t n,
                                     std::size_t dim) {
    if (n < 4) throw invalid_input("random_mean_signal: n too small");
    const std::size_t d_cap = std::min<std::size_t>(6, n / 2);
    const std::size_t d = 2 + (d_cap > 2 ? rng.below(d_cap - 1) : 0);
    const Segmentation tau = random_segmentation(rng, n, d, 2);

    std::vector<double> seg_values(d * dim);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (auto& v : seg_values) v = rng.normal();
        bool ok = true;
        for (std::size_t l = 0; ok && l + 1 < d; ++l) {
            double jump2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double diff =
                    seg_values[(l + 1) * dim + j] - seg_values[l * dim + j];
                jump2 += diff * diff;
            }
            ok = jump2 > 1e-12;
        }
        if (ok) break;
    }

    std::vector<double> values(n * dim);
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t i = tau.segment_begin(l); i < tau.segment_end(l); ++i)
            for (std::size_t j = 0; j < dim; ++j)
                values[i * dim + j] = seg_values[l * dim + j];
    return MeanSignal::from_values(n, dim, std::move(values));
}

}  // namespace kcp

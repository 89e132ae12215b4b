#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kcp/errors.hpp"
#include "kcp/series.hpp"

namespace kcp {

enum class KernelFamily { linear, polynomial, gaussian, laplace, chi_squared };

inline std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::linear: return "linear";
        case KernelFamily::polynomial: return "polynomial";
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::laplace: return "laplace";
        case KernelFamily::chi_squared: return "chi_squared";
    }
    return "unknown";
}

inline KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "linear") return KernelFamily::linear;
    if (name == "polynomial") return KernelFamily::polynomial;
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "laplace") return KernelFamily::laplace;
    if (name == "chi_squared" || name == "chi2") return KernelFamily::chi_squared;
    throw invalid_input("unknown kernel family: " + name);
}

/// A positive semidefinite kernel. `degree` applies to the polynomial family,
/// `bandwidth` to gaussian/laplace. `median_bandwidth` marks an unresolved
/// "median" sentinel; call resolve_bandwidth() against the data before use.
struct KernelSpec {
    KernelFamily family = KernelFamily::linear;
    int degree = 1;
    double bandwidth = 1.0;
    bool median_bandwidth = false;

    static KernelSpec linear() { return {KernelFamily::linear, 1, 1.0, false}; }
    static KernelSpec polynomial(int degree) {
        return {KernelFamily::polynomial, degree, 1.0, false};
    }
    static KernelSpec gaussian(double h) {
        return {KernelFamily::gaussian, 1, h, false};
    }
    static KernelSpec gaussian_median() {
        return {KernelFamily::gaussian, 1, 0.0, true};
    }
    static KernelSpec laplace(double h) {
        return {KernelFamily::laplace, 1, h, false};
    }
    static KernelSpec laplace_median() {
        return {KernelFamily::laplace, 1, 0.0, true};
    }
    static KernelSpec chi_squared() {
        return {KernelFamily::chi_squared, 1, 1.0, false};
    }
};

inline void validate(const KernelSpec& spec) {
    if (spec.family == KernelFamily::polynomial && spec.degree < 1)
        throw invalid_input("polynomial kernel requires degree >= 1");
    if ((spec.family == KernelFamily::gaussian ||
         spec.family == KernelFamily::laplace) &&
        !spec.median_bandwidth && !(spec.bandwidth > 0.0))
        throw invalid_input("gaussian/laplace kernel requires bandwidth > 0");
}

/// Nonnegative coordinates summing to one, both within tolerance.
inline bool on_simplex(std::span<const double> x, double tol = 1e-9) {
    double sum = 0.0;
    for (double v : x) {
        if (v < -tol) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

namespace detail {

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace detail

/// Pointwise kernel evaluation k(x, y).
inline double eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
    if (x.size() != y.size())
        throw invalid_input("kernel eval: dimension mismatch");
    if (x.empty()) throw invalid_input("kernel eval: empty observation");
    switch (spec.family) {
        case KernelFamily::linear:
            return detail::dot(x, y);
        case KernelFamily::polynomial: {
            if (spec.degree < 1)
                throw invalid_input("polynomial kernel requires degree >= 1");
            return std::pow(detail::dot(x, y) + 1.0, spec.degree);
        }
        case KernelFamily::gaussian: {
            if (spec.median_bandwidth || !(spec.bandwidth > 0.0))
                throw invalid_input("gaussian kernel: unresolved or non-positive bandwidth");
            const double h = spec.bandwidth;
            return std::exp(-detail::squared_distance(x, y) / (2.0 * h * h));
        }
        case KernelFamily::laplace: {
            if (spec.median_bandwidth || !(spec.bandwidth > 0.0))
                throw invalid_input("laplace kernel: unresolved or non-positive bandwidth");
            const double h = spec.bandwidth;
            return std::exp(-std::sqrt(detail::squared_distance(x, y)) / (2.0 * h * h));
        }
        case KernelFamily::chi_squared: {
            if (!on_simplex(x) || !on_simplex(y))
                throw invalid_input("chi_squared kernel requires simplex-valued observations");
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double denom = x[i] + y[i];
                if (denom <= 0.0) continue;  // 0/0 term contributes 0 (limit value)
                const double d = x[i] - y[i];
                s += d * d / denom;
            }
            return std::exp(-0.5 * s);
        }
    }
    throw invalid_input("kernel eval: unknown family");
}

/// Median of the n(n-1)/2 pairwise Euclidean distances; even counts take the
/// midpoint of the two central order statistics.
inline double median_heuristic(const Series& series) {
    const std::size_t n = series.n;
    if (n < 2) throw invalid_input("median heuristic requires n >= 2");
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dists.push_back(
                std::sqrt(detail::squared_distance(series.row(i), series.row(j))));
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    const double median = (m % 2 == 1)
                              ? dists[m / 2]
                              : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (!(median > 0.0))
        throw invalid_input("median heuristic: degenerate data (median pairwise distance is zero)");
    return median;
}

/// Replaces a "median" bandwidth sentinel with the heuristic value for the
/// given series. No-op for resolved specs.
inline KernelSpec resolve_bandwidth(KernelSpec spec, const Series& series) {
    if (spec.median_bandwidth) {
        spec.bandwidth = median_heuristic(series);
        spec.median_bandwidth = false;
    }
    return spec;
}

}  // namespace kcp

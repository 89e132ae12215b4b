#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <vector>

#include "kcp/errors.hpp"
#include "kcp/segmentation.hpp"

namespace kcp {

namespace detail {

inline std::size_t abs_diff(std::size_t a, std::size_t b) {
    return a > b ? a - b : b - a;
}

inline void require_inner(const Segmentation& t, const char* who) {
    if (t.num_segments() < 2)
        throw invalid_input(std::string(who) +
                            ": segmentation with a single segment has no inner "
                            "change-points");
}

}  // namespace detail

/// Directed loss: max over inner change-points of t1 of the distance to the
/// nearest inner change-point of t2.
inline std::size_t d_inf_1(const Segmentation& t1, const Segmentation& t2) {
    detail::require_inner(t1, "d_inf_1");
    detail::require_inner(t2, "d_inf_1");
    if (t1.n() != t2.n()) throw invalid_input("d_inf_1: mismatched n");
    std::size_t worst = 0;
    for (std::size_t a : t1.inner_changepoints()) {
        std::size_t nearest = t1.n();
        for (std::size_t b : t2.inner_changepoints())
            nearest = std::min(nearest, detail::abs_diff(a, b));
        worst = std::max(worst, nearest);
    }
    return worst;
}

/// As d_inf_1 but the inner minimum also ranges over tau_0 = 0 and tau_D = n.
inline std::size_t d_inf_2(const Segmentation& t1, const Segmentation& t2) {
    detail::require_inner(t1, "d_inf_2");
    if (t1.n() != t2.n()) throw invalid_input("d_inf_2: mismatched n");
    std::size_t worst = 0;
    for (std::size_t a : t1.inner_changepoints()) {
        std::size_t nearest = t1.n();
        for (std::size_t b : t2.boundaries())
            nearest = std::min(nearest, detail::abs_diff(a, b));
        worst = std::max(worst, nearest);
    }
    return worst;
}

/// Index-matched loss for equal segment counts: max_i |tau^1_i - tau^2_i|.
inline std::size_t d_inf_3(const Segmentation& t1, const Segmentation& t2) {
    if (t1.num_segments() != t2.num_segments())
        throw invalid_input("d_inf_3: segmentations must have the same number of segments");
    detail::require_inner(t1, "d_inf_3");
    if (t1.n() != t2.n()) throw invalid_input("d_inf_3: mismatched n");
    std::size_t worst = 0;
    const auto a = t1.inner_changepoints();
    const auto b = t2.inner_changepoints();
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, detail::abs_diff(a[i], b[i]));
    return worst;
}

inline std::size_t hausdorff_1(const Segmentation& t1, const Segmentation& t2) {
    return std::max(d_inf_1(t1, t2), d_inf_1(t2, t1));
}

inline std::size_t hausdorff_2(const Segmentation& t1, const Segmentation& t2) {
    return std::max(d_inf_2(t1, t2), d_inf_2(t2, t1));
}

/// Block-averaging projection matrix of a segmentation:
/// entries 1/|segment| inside diagonal blocks, 0 elsewhere.
struct ProjectionMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // n * n, row-major

    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
};

inline ProjectionMatrix projection_matrix(const Segmentation& tau) {
    ProjectionMatrix p;
    p.n = tau.n();
    p.entries.assign(p.n * p.n, 0.0);
    for (std::size_t l = 0; l < tau.num_segments(); ++l) {
        const std::size_t a = tau.segment_begin(l);
        const std::size_t b = tau.segment_end(l);
        const double w = 1.0 / static_cast<double>(b - a);
        for (std::size_t i = a; i < b; ++i)
            for (std::size_t j = a; j < b; ++j) p.entries[i * p.n + j] = w;
    }
    return p;
}

/// Squared Frobenius loss via the closed form
/// d_F^2 = D1 + D2 - 2 sum_{k,l} |I_k ∩ J_l|^2 / (|I_k| |J_l|).
inline double frobenius_squared(const Segmentation& t1, const Segmentation& t2) {
    if (t1.n() != t2.n()) throw invalid_input("frobenius: mismatched n");
    double cross = 0.0;
    std::size_t k = 0, l = 0;
    while (k < t1.num_segments() && l < t2.num_segments()) {
        const std::size_t lo = std::max(t1.segment_begin(k), t2.segment_begin(l));
        const std::size_t hi = std::min(t1.segment_end(k), t2.segment_end(l));
        if (hi > lo) {
            const double inter = static_cast<double>(hi - lo);
            cross += inter * inter /
                     (static_cast<double>(t1.segment_length(k)) *
                      static_cast<double>(t2.segment_length(l)));
        }
        if (t1.segment_end(k) <= t2.segment_end(l))
            ++k;
        else
            ++l;
    }
    const double d2 = static_cast<double>(t1.num_segments()) +
                      static_cast<double>(t2.num_segments()) - 2.0 * cross;
    return std::max(0.0, d2);
}

/// Frobenius loss d_F = || Pi_{t1} - Pi_{t2} ||_F.
inline double frobenius(const Segmentation& t1, const Segmentation& t2) {
    return std::sqrt(frobenius_squared(t1, t2));
}

/// Outcome of checking the distance-equality lemma on a concrete pair:
/// (i)  (1/n) d_inf_1(t1,t2) < min{lambda_min(t1), lambda_min(t2)} / 2
///      implies equal segment counts and equality of all five losses;
/// (ii) equal counts and (1/n) d_inf_1(t1,t2) < lambda_min(t1) / 2
///      implies d_inf_1 is symmetric and equals hausdorff_1.
struct LossEqualityReport {
    bool evaluable = false;      // both segmentations have inner change-points
    bool condition_i = false;
    bool condition_ii = false;
    bool passed = true;          // every triggered assertion holds
    std::optional<std::size_t> d1_12, d1_21, d2_12, d2_21, d3, h1, h2;
};

inline LossEqualityReport check_loss_equalities(const Segmentation& t1, const Segmentation& t2) {
    if (t1.n() != t2.n()) throw invalid_input("check_loss_equalities: mismatched n");
    LossEqualityReport r;
    if (t1.num_segments() < 2 || t2.num_segments() < 2) return r;
    r.evaluable = true;

    const double n = static_cast<double>(t1.n());
    const std::size_t d1 = d_inf_1(t1, t2);
    r.d1_12 = d1;
    r.d1_21 = d_inf_1(t2, t1);
    r.d2_12 = d_inf_2(t1, t2);
    r.d2_21 = d_inf_2(t2, t1);
    r.h1 = std::max(*r.d1_12, *r.d1_21);
    r.h2 = std::max(*r.d2_12, *r.d2_21);

    const double eps = static_cast<double>(d1) / n;
    r.condition_i =
        eps < 0.5 * std::min(t1.lambda_min(), t2.lambda_min());
    if (r.condition_i) {
        if (t1.num_segments() != t2.num_segments()) {
            r.passed = false;
        } else {
            r.d3 = d_inf_3(t1, t2);
            const std::size_t v = *r.d1_12;
            r.passed = r.passed && *r.d2_12 == v && *r.d3 == v && *r.h1 == v &&
                       *r.h2 == v;
        }
    } else if (t1.num_segments() == t2.num_segments()) {
        r.d3 = d_inf_3(t1, t2);
    }

    r.condition_ii = t1.num_segments() == t2.num_segments() &&
                     eps < 0.5 * t1.lambda_min();
    if (r.condition_ii)
        r.passed = r.passed && *r.d1_12 == *r.d1_21 && *r.d1_12 == *r.h1;
    return r;
}

/// Outcome of checking the Hausdorff/Frobenius equivalence on a concrete
/// pair with equal segment counts:
/// upper: eps < lambda_min(t1)/2  =>  d_F^2 <= (12 D1 / lambda_min) eps
/// lower: eps < lambda_min(t1)/3  =>  (2 / (3 lambda_max)) eps <= d_F^2
/// where eps = (1/n) d_inf_1(t1, t2).
struct LossEquivalenceReport {
    bool evaluable = false;
    bool upper_hypothesis = false;
    bool lower_hypothesis = false;
    bool passed = true;
    double eps = 0.0;
    double d_f_squared = 0.0;
    double upper_bound = 0.0;
    double lower_bound = 0.0;
};

inline LossEquivalenceReport check_loss_equivalence(const Segmentation& t1, const Segmentation& t2) {
    if (t1.num_segments() != t2.num_segments())
        throw invalid_input("check_loss_equivalence: segmentations must have the same number of segments");
    if (t1.n() != t2.n()) throw invalid_input("check_loss_equivalence: mismatched n");
    LossEquivalenceReport r;
    if (t1.num_segments() < 2) return r;
    r.evaluable = true;

    const double n = static_cast<double>(t1.n());
    r.eps = static_cast<double>(d_inf_1(t1, t2)) / n;
    r.d_f_squared = frobenius_squared(t1, t2);

    r.upper_hypothesis = r.eps < t1.lambda_min() / 2.0;
    if (r.upper_hypothesis) {
        r.upper_bound =
            12.0 * static_cast<double>(t1.num_segments()) / t1.lambda_min() * r.eps;
        const double tol = 1e-9 * std::max(1.0, r.upper_bound);
        r.passed = r.passed && r.d_f_squared <= r.upper_bound + tol;
    }
    r.lower_hypothesis = r.eps < t1.lambda_min() / 3.0;
    if (r.lower_hypothesis) {
        r.lower_bound = 2.0 / (3.0 * t1.lambda_max()) * r.eps;
        const double tol = 1e-9 * std::max(1.0, r.lower_bound);
        r.passed = r.passed && r.lower_bound <= r.d_f_squared + tol;
    }
    return r;
}

}  // namespace kcp

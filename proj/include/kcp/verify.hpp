#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "kcp/metrics.hpp"
#include "kcp/oracle.hpp"
#include "kcp/rng.hpp"

namespace kcp {

struct VerifyCheck {
    std::string name;
    std::size_t instances = 0;
    std::size_t violations = 0;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed = true;
};

namespace detail {

/// Jittered copy of t1: each inner change-point moved by at most
/// floor(min_segment/5), which keeps every equality/equivalence hypothesis
/// on (t1, t2) satisfied by construction.
inline Segmentation jittered_segmentation(RandomSource& rng,
                                          const Segmentation& t1) {
    const std::size_t min_len = t1.min_segment_length();
    const std::size_t j = std::max<std::size_t>(1, min_len / 5);
    std::vector<std::size_t> bounds(t1.boundaries().begin(),
                                    t1.boundaries().end());
    for (std::size_t i = 1; i + 1 < bounds.size(); ++i) {
        const std::size_t shift = rng.below(2 * j + 1);  // in [0, 2j]
        bounds[i] = bounds[i] + shift - j;
    }
    return Segmentation(std::move(bounds));
}

inline double frobenius_direct(const Segmentation& a, const Segmentation& b) {
    const ProjectionMatrix pa = projection_matrix(a);
    const ProjectionMatrix pb = projection_matrix(b);
    double s = 0.0;
    for (std::size_t i = 0; i < pa.entries.size(); ++i) {
        const double d = pa.entries[i] - pb.entries[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace detail

/// Runs the numerical battery for the deterministic lemmas and the loss
/// identities: every check draws `instances` seeded random instances and
/// counts violations (any single violation fails the battery).
inline VerifyReport run_verify_battery(std::uint64_t seed,
                                       std::size_t instances = 1000,
                                       std::size_t kolmogorov_trials = 10000) {
    VerifyReport report;
    auto add = [&](VerifyCheck check) {
        check.passed = check.violations == 0 && check.passed;
        report.all_passed = report.all_passed && check.passed;
        report.checks.push_back(std::move(check));
    };

    // Risk decomposition identity on random (mu*, eps, tau).
    {
        VerifyCheck c{"risk_decomposition_identity", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 2, i));
            const std::size_t n = 10 + rng.below(51);
            const std::size_t dim = 1 + rng.below(3);
            const MeanSignal mu = random_mean_signal(rng, n, dim);
            NoiseSample eps = gaussian_noise(rng, n, dim);
            const Segmentation tau =
                random_segmentation(rng, n, 1 + rng.below(std::min<std::size_t>(8, n)));
            if (!decomposition_terms(mu, eps, tau).identity_ok) ++c.violations;
        }
        add(std::move(c));
    }

    // Approximation-error lower bound for under-segmentation (D_tau < D*).
    {
        VerifyCheck c{"approx_error_bound_under_segmentation", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 3, i));
            const std::size_t n = 10 + rng.below(51);
            const MeanSignal mu = random_mean_signal(rng, n, 1 + rng.below(3));
            const std::size_t d_star = mu.true_tau.num_segments();
            const Segmentation tau =
                random_segmentation(rng, n, 1 + rng.below(d_star - 1));
            const auto r = check_approx_bounds(mu, tau);
            if (r.under_seg_applicable && !r.under_seg_ok) ++c.violations;
        }
        add(std::move(c));
    }

    // Equality case of the lower bound: one mid jump, tau = [0, n].
    {
        VerifyCheck c{"approx_error_bound_tight_case", instances, 0, true, ""};
        double worst = 0.0;
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 33, i));
            const std::size_t m = 2 + rng.below(30);
            std::vector<double> values(2 * m);
            const double a = rng.normal(), b = a + 1.0 + rng.uniform01();
            for (std::size_t k = 0; k < m; ++k) values[k] = a;
            for (std::size_t k = m; k < 2 * m; ++k) values[k] = b;
            const MeanSignal mu = MeanSignal::scalar(std::move(values));
            const auto r =
                check_approx_bounds(mu, Segmentation::trivial(2 * m));
            worst = std::max(worst, std::abs(r.under_seg_slack));
            if (std::abs(r.under_seg_slack) >= 1e-10) ++c.violations;
        }
        std::ostringstream os;
        os << "max |slack| = " << worst;
        c.detail = os.str();
        add(std::move(c));
    }

    // Approximation-error lower bound for arbitrary segmentations.
    {
        VerifyCheck c{"approx_error_bound_general", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 4, i));
            const std::size_t n = 10 + rng.below(51);
            const MeanSignal mu = random_mean_signal(rng, n, 1 + rng.below(3));
            const Segmentation tau = random_segmentation(
                rng, n, 2 + rng.below(std::min<std::size_t>(7, n - 1)));
            const auto r = check_approx_bounds(mu, tau);
            if (r.general_applicable && !r.general_ok) ++c.violations;
        }
        add(std::move(c));
    }

    // Inner-segment partial sums vs M_n.
    {
        VerifyCheck c{"partial_sum_factor_two_bound", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 5, i));
            const std::size_t n = 5 + rng.below(56);
            const std::size_t dim = 1 + rng.below(3);
            NoiseSample eps = gaussian_noise(rng, n, dim);
            if (!check_partial_sums(eps).bound_ok) ++c.violations;
        }
        add(std::move(c));
    }

    // Deterministic bounds on the linear and quadratic terms.
    {
        VerifyCheck cl{"linear_term_bound", instances, 0, true, ""};
        VerifyCheck cq{"quadratic_term_bound", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 6, i));
            const std::size_t n = 10 + rng.below(51);
            const std::size_t dim = 1 + rng.below(3);
            const MeanSignal mu = random_mean_signal(rng, n, dim);
            NoiseSample eps = gaussian_noise(rng, n, dim);
            const Segmentation tau =
                random_segmentation(rng, n, 1 + rng.below(std::min<std::size_t>(8, n)));
            const auto r = check_noise_term_bounds(mu, eps, tau);
            if (!r.l_ok) ++cl.violations;
            if (!r.q_ok) ++cq.violations;
        }
        add(std::move(cl));
        add(std::move(cq));
    }

    // Monte-Carlo Kolmogorov-type tail bound.
    {
        VerifyCheck c{"kolmogorov_tail_bound", 3, 0, true, ""};
        std::ostringstream os;
        for (const double x : {15.0, 30.0, 60.0}) {
            const auto r = check_kolmogorov(100, 1, 1.0, x, kolmogorov_trials,
                                            mix_seed(seed, 10, 0));
            if (!r.passed) ++c.violations;
            os << "x=" << x << ": phat=" << r.empirical
               << " ucb=" << r.upper_confidence << " bound=" << r.bound << "; ";
        }
        c.detail = os.str();
        add(std::move(c));
    }

    // Loss equalities under the closeness condition.
    {
        VerifyCheck c{"loss_equalities_close_pair", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 1, i));
            const std::size_t n = 30 + rng.below(171);
            const std::size_t d = 2 + rng.below(std::min<std::size_t>(4, n / 9 - 1));
            const Segmentation t1 = random_segmentation(rng, n, d, 9);
            const Segmentation t2 = detail::jittered_segmentation(rng, t1);
            const auto r = check_loss_equalities(t1, t2);
            if (!r.evaluable || !r.condition_i || !r.passed) ++c.violations;
        }
        add(std::move(c));
    }

    // Hausdorff/Frobenius equivalence under its hypotheses.
    {
        VerifyCheck c{"hausdorff_frobenius_equivalence", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 7, i));
            const std::size_t n = 30 + rng.below(171);
            const std::size_t d = 2 + rng.below(std::min<std::size_t>(4, n / 9 - 1));
            const Segmentation t1 = random_segmentation(rng, n, d, 9);
            const Segmentation t2 = detail::jittered_segmentation(rng, t1);
            const auto r = check_loss_equivalence(t1, t2);
            if (!r.evaluable || !r.upper_hypothesis || !r.lower_hypothesis ||
                !r.passed)
                ++c.violations;
        }
        add(std::move(c));
    }

    // Closed-form Frobenius loss vs direct projection-matrix norm, and the
    // |D1 - D2| <= d_F^2 <= D1 + D2 sandwich.
    {
        VerifyCheck cf{"frobenius_closed_form", instances, 0, true, ""};
        VerifyCheck cs{"frobenius_count_sandwich", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 8, i));
            const std::size_t n = 4 + rng.below(27);
            const Segmentation t1 =
                random_segmentation(rng, n, 1 + rng.below(std::min<std::size_t>(6, n)));
            const Segmentation t2 =
                random_segmentation(rng, n, 1 + rng.below(std::min<std::size_t>(6, n)));
            const double closed = frobenius(t1, t2);
            const double direct = detail::frobenius_direct(t1, t2);
            if (std::abs(closed - direct) > 1e-9) ++cf.violations;
            const double d2 = frobenius_squared(t1, t2);
            const auto d1s = static_cast<double>(t1.num_segments());
            const auto d2s = static_cast<double>(t2.num_segments());
            if (d2 < std::abs(d1s - d2s) - 1e-9 || d2 > d1s + d2s + 1e-9)
                ++cs.violations;
        }
        add(std::move(cf));
        add(std::move(cs));
    }

    // A_tau never increases when a change-point is inserted.
    {
        VerifyCheck c{"approx_error_refinement_monotone", instances, 0, true, ""};
        for (std::size_t i = 0; i < instances; ++i) {
            RandomSource rng(mix_seed(seed, 9, i));
            const std::size_t n = 10 + rng.below(51);
            const MeanSignal mu = random_mean_signal(rng, n, 1 + rng.below(3));
            Segmentation tau =
                random_segmentation(rng, n, 1 + rng.below(std::min<std::size_t>(6, n)));
            std::size_t b = 1 + rng.below(n - 1);
            bool present = false;
            for (std::size_t v : tau.boundaries()) present = present || v == b;
            if (present) continue;
            const double before = approx_error(mu, tau);
            const double after = approx_error(mu, tau.refined_with(b));
            if (after > before + 1e-10 * std::max(1.0, before)) ++c.violations;
        }
        add(std::move(c));
    }

    return report;
}

}  // namespace kcp

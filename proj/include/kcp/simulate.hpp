#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kcp/errors.hpp"
#include "kcp/gram.hpp"
#include "kcp/kernel.hpp"
#include "kcp/metrics.hpp"
#include "kcp/rng.hpp"
#include "kcp/segmenter.hpp"
#include "kcp/series.hpp"
#include "kcp/threading.hpp"

namespace kcp {

/// Piecewise-constant mean on [0,1]: level j on (breakpoints[j-1], breakpoints[j]]
/// (right-closed), so that index i carries level j iff
/// floor(n * b_{j-1}) < i <= floor(n * b_j).
struct PiecewiseConstantMean {
    std::vector<double> breakpoints;  // strictly increasing, inside (0, 1)
    std::vector<double> levels;       // breakpoints.size() + 1 values
};

/// The three scalar test signals: four jumps for profiles 1 and 2, nine
/// jumps with uneven segment lengths for profile 3, levels in [-2, 3].
/// Jump sizes are large relative to the unit noise so that the signals are
/// detectable at the sample sizes the experiments use.
inline const PiecewiseConstantMean& piecewise_mean_profile(int which) {
    static const PiecewiseConstantMean profiles[3] = {
        {{0.2, 0.4, 0.6, 0.8}, {0.0, 3.0, -1.0, 2.5, -2.0}},
        {{0.15, 0.4, 0.55, 0.8}, {-1.5, 2.0, -2.0, 1.5, -1.5}},
        {{0.07, 0.21, 0.3, 0.42, 0.5, 0.63, 0.73, 0.84, 0.93},
         {-2.0, 0.5, 3.0, 0.5, -2.0, 3.0, -2.0, 0.5, 3.0, -2.0}},
    };
    if (which < 1 || which > 3)
        throw invalid_input("piecewise mean profile must be 1, 2 or 3");
    return profiles[which - 1];
}

/// True boundaries floor(n * b_j); errors when n is too small for them to be
/// distinct and interior.
inline Segmentation piecewise_true_segmentation(const PiecewiseConstantMean& mean,
                                                std::size_t n) {
    std::vector<std::size_t> bounds{0};
    for (const double b : mean.breakpoints) {
        const auto tau = static_cast<std::size_t>(
            std::floor(static_cast<double>(n) * b + 1e-9));
        if (tau <= bounds.back() || tau >= n)
            throw invalid_input(
                "n too small: breakpoints do not map to distinct boundaries");
        bounds.push_back(tau);
    }
    bounds.push_back(n);
    return Segmentation(std::move(bounds));
}

/// Scalar series X_i = mu(i/n) + sigma * g_i with i.i.d. standard normal g_i,
/// together with the induced true segmentation.
inline std::pair<Series, Segmentation> gen_piecewise_mean(int which,
                                                          std::size_t n,
                                                          std::uint64_t seed,
                                                          double sigma = 1.0) {
    if (n < 20) throw invalid_input("gen_piecewise_mean requires n >= 20");
    const PiecewiseConstantMean& mean = piecewise_mean_profile(which);
    const Segmentation true_tau = piecewise_true_segmentation(mean, n);

    RandomSource rng(seed);
    Series series(n, 1);
    for (std::size_t l = 0; l < true_tau.num_segments(); ++l)
        for (std::size_t i = true_tau.segment_begin(l);
             i < true_tau.segment_end(l); ++i)
            series.data[i] = mean.levels[l] + sigma * rng.normal();
    return {std::move(series), true_tau};
}

/// Scalar series whose distribution changes only through its number of modes:
/// outer thirds standard normal, middle third a (1/2, 1/2) mixture of
/// N(+delta, 1 - delta^2) and N(-delta, 1 - delta^2). Every marginal has
/// mean 0 and variance 1.
inline std::pair<Series, Segmentation> gen_modes_mixture(std::size_t n,
                                                         double delta,
                                                         std::uint64_t seed) {
    if (n < 9) throw invalid_input("gen_modes_mixture requires n >= 9");
    if (!(delta > 0.0 && delta < 1.0))
        throw invalid_input("gen_modes_mixture requires 0 < delta < 1");
    const std::size_t t1 = n / 3;
    const std::size_t t2 = 2 * n / 3;
    const double comp_sd = std::sqrt(1.0 - delta * delta);

    RandomSource rng(seed);
    Series series(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= t1 && i < t2) {
            const double sign = rng.coin() ? 1.0 : -1.0;
            series.data[i] = sign * delta + comp_sd * rng.normal();
        } else {
            series.data[i] = rng.normal();
        }
    }
    return {std::move(series), Segmentation({0, t1, t2, n})};
}

// ---------------------------------------------------------------------------
// Experiment harness
// ---------------------------------------------------------------------------

enum class SelectionMode { auto_penalty, fixed_d, fixed_c };

struct SelectionSpec {
    SelectionMode mode = SelectionMode::auto_penalty;
    std::vector<double> c_grid;  // empty: default grid
    std::size_t d = 0;           // fixed_d
    double delta_n = 0.0;        // fixed_d
    double c = 0.0;              // fixed_c
};

struct GeneratorSpec {
    enum class Kind { piecewise_mean, modes_mixture };
    Kind kind = Kind::piecewise_mean;
    int which = 1;         // piecewise_mean
    double sigma = 1.0;    // piecewise_mean noise scale
    double delta = 0.999;  // modes_mixture
};

struct ExperimentConfig {
    GeneratorSpec generator;
    std::vector<std::size_t> n_grid;
    std::size_t repetitions = 1;
    KernelSpec kernel;
    SelectionSpec selection;
    std::uint64_t master_seed = 0;
    std::size_t regression_threshold = 0;  // 0: include the whole grid
    std::size_t d_max = 30;
    std::size_t min_seg_len = 1;
};

struct ReplicationRecord {
    std::size_t n = 0;
    std::size_t rep = 0;
    double loss = 0.0;  // (1/n) * hausdorff_2(true, estimate)
    std::size_t d_hat = 0;
};

struct SummaryRow {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double std_error = 0.0;  // stddev / sqrt(repetitions)
};

struct ExperimentResult {
    std::vector<ReplicationRecord> records;  // n-major, then replication order
    std::vector<SummaryRow> summary;
};

namespace detail {

/// (1/n) d_H^(2) between the true segmentation and an estimate; a direction
/// whose segmentation has no inner change-points contributes 0 (max over an
/// empty set), so a one-segment estimate is still scored.
inline double hausdorff2_loss(const Segmentation& truth,
                              const Segmentation& estimate) {
    std::size_t forward = 0, backward = 0;
    if (truth.num_segments() >= 2) forward = d_inf_2(truth, estimate);
    if (estimate.num_segments() >= 2) backward = d_inf_2(estimate, truth);
    return static_cast<double>(std::max(forward, backward)) /
           static_cast<double>(truth.n());
}

inline std::pair<Series, Segmentation> generate(const GeneratorSpec& gen,
                                                std::size_t n,
                                                std::uint64_t seed) {
    switch (gen.kind) {
        case GeneratorSpec::Kind::piecewise_mean:
            return gen_piecewise_mean(gen.which, n, seed, gen.sigma);
        case GeneratorSpec::Kind::modes_mixture:
            return gen_modes_mixture(n, gen.delta, seed);
    }
    throw invalid_input("unknown generator kind");
}

inline ReplicationRecord run_replication(const ExperimentConfig& config,
                                         std::size_t n, std::size_t rep,
                                         unsigned gram_threads) {
    const std::uint64_t seed = mix_seed(config.master_seed, n, rep);
    auto [series, true_tau] = generate(config.generator, n, seed);
    const KernelSpec kernel = resolve_bandwidth(config.kernel, series);
    const GramMatrix gram = GramMatrix::build(kernel, series, gram_threads);

    Segmentation estimate;
    if (config.selection.mode == SelectionMode::fixed_d) {
        estimate = solve_fixed_d(gram, config.selection.d, config.selection.delta_n);
    } else {
        const std::size_t d_cap =
            std::min(config.d_max, n / std::max<std::size_t>(1, config.min_seg_len));
        const RiskProfile profile = solve_all_d(gram, d_cap, config.min_seg_len);
        const double m2 = gram.max_diag();
        double c = config.selection.c;
        if (config.selection.mode == SelectionMode::auto_penalty) {
            const std::vector<double> grid = config.selection.c_grid.empty()
                                                 ? default_c_grid()
                                                 : config.selection.c_grid;
            c = calibrate_c(profile, m2, n, grid);
        }
        estimate = select_penalized(profile, {c, m2}, n).segmentation;
    }

    return {n, rep, hausdorff2_loss(true_tau, estimate),
            estimate.num_segments()};
}

}  // namespace detail

inline void validate(const ExperimentConfig& config) {
    if (config.n_grid.empty())
        throw invalid_input("experiment config: empty n grid");
    for (std::size_t i = 1; i < config.n_grid.size(); ++i)
        if (config.n_grid[i] <= config.n_grid[i - 1])
            throw invalid_input("experiment config: n grid must be strictly increasing");
    if (config.repetitions < 1)
        throw invalid_input("experiment config: repetitions must be >= 1");
    if (config.regression_threshold > config.n_grid.back())
        throw invalid_input("experiment config: regression threshold above the n grid");
    validate(config.kernel);
}

/// Runs repetitions x n_grid seeded replications. Replication seeds derive
/// from (master_seed, n, rep) only, so results are bit-identical regardless
/// of the worker count, and adding grid points does not perturb existing
/// replications.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate(config);
    const std::size_t reps = config.repetitions;
    const std::size_t jobs = config.n_grid.size() * reps;

    ExperimentResult result;
    result.records.resize(jobs);
    const unsigned workers = worker_thread_count();
    const unsigned gram_threads = workers > 1 ? 1 : workers;
    parallel_for(
        jobs,
        [&](std::size_t idx) {
            const std::size_t n = config.n_grid[idx / reps];
            const std::size_t rep = idx % reps;
            try {
                result.records[idx] =
                    detail::run_replication(config, n, rep, gram_threads);
            } catch (const std::exception& e) {
                throw error("replication failed (n=" + std::to_string(n) +
                            ", rep=" + std::to_string(rep) + ", seed=" +
                            std::to_string(mix_seed(config.master_seed, n, rep)) +
                            "): " + e.what());
            }
        },
        workers);

    result.summary.reserve(config.n_grid.size());
    for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
        SummaryRow row;
        row.n = config.n_grid[g];
        double sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r)
            sum += result.records[g * reps + r].loss;
        row.mean = sum / static_cast<double>(reps);
        double ss = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double d = result.records[g * reps + r].loss - row.mean;
            ss += d * d;
        }
        row.stddev =
            reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;
        row.std_error = row.stddev / std::sqrt(static_cast<double>(reps));
        result.summary.push_back(row);
    }
    return result;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares of log(mean loss) on log(n), restricted to grid
/// points with n >= threshold. A mean loss of exactly zero at an included n
/// is an error (log undefined): exclude that point or raise the threshold.
inline SlopeFit slope_regression(const ExperimentResult& result,
                                 std::size_t threshold) {
    std::vector<double> xs, ys;
    for (const SummaryRow& row : result.summary) {
        if (row.n < threshold) continue;
        if (row.mean <= 0.0)
            throw invalid_input(
                "slope_regression: mean loss is exactly zero at n = " +
                std::to_string(row.n) +
                "; exclude this grid point or raise the threshold");
        xs.push_back(std::log(static_cast<double>(row.n)));
        ys.push_back(std::log(row.mean));
    }
    if (xs.size() < 2)
        throw invalid_input("slope_regression: needs at least two grid points at "
                            "or above the threshold");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace kcp

// Command-line front end: detection on CSV data, risk sweeps, segmentation
// metrics, the lemma verification battery, and experiment reproduction.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible
// configuration.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kcp/kcp.hpp"

namespace {

using kcp::json;

struct KernelFlags {
    std::string family = "linear";
    std::string bandwidth;  // number or "median"; empty: median for gaussian/laplace
    int degree = 2;
};

void add_kernel_flags(CLI::App* cmd, KernelFlags& flags) {
    cmd->add_option("--kernel", flags.family,
                    "kernel family: linear | polynomial | gaussian | laplace | chi_squared")
        ->default_val("linear");
    cmd->add_option("--bandwidth", flags.bandwidth,
                    "gaussian/laplace bandwidth (positive real or \"median\"; "
                    "default median)");
    cmd->add_option("--degree", flags.degree, "polynomial degree")
        ->default_val(2);
}

kcp::KernelSpec kernel_from_flags(const KernelFlags& flags) {
    kcp::KernelSpec spec;
    spec.family = kcp::kernel_family_from_string(flags.family);
    spec.degree = flags.degree;
    if (spec.family == kcp::KernelFamily::gaussian ||
        spec.family == kcp::KernelFamily::laplace) {
        if (flags.bandwidth.empty() || flags.bandwidth == "median") {
            spec.median_bandwidth = true;
        } else {
            try {
                spec.bandwidth = std::stod(flags.bandwidth);
            } catch (const std::exception&) {
                throw CLI::ValidationError("--bandwidth",
                                           "expected a number or \"median\"");
            }
        }
    }
    kcp::validate(spec);
    return spec;
}

void emit(const json& payload, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << payload.dump(2) << std::endl;
        return;
    }
    std::ofstream out(output_path);
    if (!out)
        throw kcp::invalid_input("cannot open output file: " + output_path);
    out << payload.dump(2) << std::endl;
}

json losses_report(const kcp::Segmentation& t1, const kcp::Segmentation& t2) {
    json report;
    report["n"] = t1.n();
    report["d_t1"] = t1.num_segments();
    report["d_t2"] = t2.num_segments();

    auto guarded = [](auto&& fn) -> json {
        try {
            return fn();
        } catch (const kcp::invalid_input&) {
            return nullptr;
        }
    };
    report["d_inf_1"] = {{"t1_t2", guarded([&] { return kcp::d_inf_1(t1, t2); })},
                         {"t2_t1", guarded([&] { return kcp::d_inf_1(t2, t1); })}};
    report["d_inf_2"] = {{"t1_t2", guarded([&] { return kcp::d_inf_2(t1, t2); })},
                         {"t2_t1", guarded([&] { return kcp::d_inf_2(t2, t1); })}};
    report["d_inf_3"] = guarded([&] { return kcp::d_inf_3(t1, t2); });
    report["hausdorff_1"] = guarded([&] { return kcp::hausdorff_1(t1, t2); });
    report["hausdorff_2"] = guarded([&] { return kcp::hausdorff_2(t1, t2); });
    report["frobenius"] = kcp::frobenius(t1, t2);
    report["frobenius_squared"] = kcp::frobenius_squared(t1, t2);

    const kcp::LossEqualityReport l1 = kcp::check_loss_equalities(t1, t2);
    json l1j{{"evaluable", l1.evaluable},
             {"condition_i", l1.condition_i},
             {"condition_ii", l1.condition_ii},
             {"passed", l1.passed}};
    report["loss_equalities"] = l1j;

    if (t1.num_segments() == t2.num_segments()) {
        const kcp::LossEquivalenceReport p1 = kcp::check_loss_equivalence(t1, t2);
        report["loss_equivalence"] = {{"evaluable", p1.evaluable},
                           {"upper_hypothesis", p1.upper_hypothesis},
                           {"lower_hypothesis", p1.lower_hypothesis},
                           {"passed", p1.passed},
                           {"d_f_squared", p1.d_f_squared},
                           {"upper_bound", p1.upper_bound},
                           {"lower_bound", p1.lower_bound}};
    } else {
        report["loss_equivalence"] = nullptr;
    }
    return report;
}

struct DetectOptions {
    std::string input;
    std::string output;
    KernelFlags kernel;
    bool header = false;
    std::size_t d_max = 30;
    std::size_t min_seg_len = 1;
    std::optional<std::size_t> fixed_d;
    double delta_n = 0.0;
    std::optional<double> penalty_c;
};

int run_detect(const DetectOptions& opt) {
    const kcp::Series series = kcp::read_csv(opt.input, opt.header);
    const kcp::KernelSpec kernel =
        kcp::resolve_bandwidth(kernel_from_flags(opt.kernel), series);
    const kcp::GramMatrix gram = kcp::GramMatrix::build(kernel, series);
    const double m2 = gram.max_diag();

    json result;
    result["n"] = series.n;
    result["kernel"] = kcp::kernel_spec_to_json(kernel);
    result["m_squared"] = m2;

    if (opt.fixed_d) {
        const kcp::Segmentation tau =
            kcp::solve_fixed_d(gram, *opt.fixed_d, opt.delta_n);
        const double risk = kcp::empirical_risk(gram, tau);
        result["boundaries"] = tau.boundaries();
        result["d_hat"] = tau.num_segments();
        result["risk"] = risk;
        result["penalty_c"] = nullptr;
        result["per_d"] = json::array({{{"d", tau.num_segments()},
                                        {"risk", risk},
                                        {"boundaries", tau.boundaries()}}});
    } else {
        const std::size_t d_cap =
            std::min(opt.d_max, series.n / std::max<std::size_t>(1, opt.min_seg_len));
        const kcp::RiskProfile profile =
            kcp::solve_all_d(gram, d_cap, opt.min_seg_len);
        const std::vector<double> grid = kcp::default_c_grid();
        const double c = opt.penalty_c
                             ? *opt.penalty_c
                             : kcp::calibrate_c(profile, m2, series.n, grid);
        const kcp::RiskProfileEntry& pick =
            kcp::select_penalized(profile, {c, m2}, series.n);
        result["boundaries"] = pick.segmentation.boundaries();
        result["d_hat"] = pick.d;
        result["risk"] = pick.risk;
        result["penalty_c"] = c;
        result["per_d"] = kcp::risk_profile_to_json(profile)["per_d"];
    }
    emit(result, opt.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kcp: kernel change-point detection toolkit"};
    app.require_subcommand(1);

    // --- detect ---
    DetectOptions detect;
    CLI::App* cmd_detect =
        app.add_subcommand("detect", "detect change-points in a CSV series");
    cmd_detect->add_option("input", detect.input, "input CSV (one observation per row)")
        ->required();
    add_kernel_flags(cmd_detect, detect.kernel);
    cmd_detect->add_flag("--header", detect.header, "skip one header line");
    cmd_detect->add_option("--output", detect.output, "output JSON path (default stdout)");
    cmd_detect->add_option("--d-max", detect.d_max, "maximum number of segments")
        ->default_val(30);
    cmd_detect->add_option("--min-seg-len", detect.min_seg_len,
                           "minimal segment length")
        ->default_val(1);
    std::size_t fixed_d_value = 0;
    CLI::Option* fixed_d_opt = cmd_detect->add_option(
        "--fixed-d", fixed_d_value, "solve for exactly this number of segments");
    cmd_detect->add_option("--delta-n", detect.delta_n,
                           "minimal segment fraction for --fixed-d");
    double penalty_c_value = 0.0;
    CLI::Option* penalty_c_opt = cmd_detect->add_option(
        "--penalty-c", penalty_c_value, "fixed penalty constant (skip calibration)");
    fixed_d_opt->excludes(penalty_c_opt);

    // --- sweep ---
    DetectOptions sweep;
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "minimal risk for every number of segments");
    cmd_sweep->add_option("input", sweep.input, "input CSV")->required();
    add_kernel_flags(cmd_sweep, sweep.kernel);
    cmd_sweep->add_flag("--header", sweep.header, "skip one header line");
    cmd_sweep->add_option("--output", sweep.output, "output JSON path (default stdout)");
    cmd_sweep->add_option("--d-max", sweep.d_max, "maximum number of segments")
        ->default_val(30);
    cmd_sweep->add_option("--min-seg-len", sweep.min_seg_len, "minimal segment length")
        ->default_val(1);

    // --- metrics ---
    std::string metrics_t1, metrics_t2, metrics_output;
    CLI::App* cmd_metrics = app.add_subcommand(
        "metrics", "losses between two segmentations given as boundary lists");
    cmd_metrics->add_option("t1", metrics_t1, "boundaries, e.g. 0,8,17,19")->required();
    cmd_metrics->add_option("t2", metrics_t2, "boundaries, e.g. 0,7,14,19")->required();
    cmd_metrics->add_option("--output", metrics_output, "output JSON path");

    // --- verify ---
    std::uint64_t verify_seed = 20170601;
    std::size_t verify_instances = 1000, verify_trials = 10000;
    std::string verify_output;
    CLI::App* cmd_verify = app.add_subcommand(
        "verify", "run the numerical battery for the deterministic lemmas");
    cmd_verify->add_option("--seed", verify_seed, "battery seed")
        ->default_val(20170601);
    cmd_verify->add_option("--instances", verify_instances,
                           "random instances per check")
        ->default_val(1000);
    cmd_verify->add_option("--trials", verify_trials,
                           "Monte-Carlo trials for the tail bound")
        ->default_val(10000);
    cmd_verify->add_option("--output", verify_output, "output JSON path");

    // --- simulate ---
    std::string sim_config_path, sim_output, sim_csv;
    std::uint64_t sim_seed = 0;
    CLI::App* cmd_simulate =
        app.add_subcommand("simulate", "run a seeded consistency experiment");
    cmd_simulate->add_option("config", sim_config_path, "experiment config JSON")
        ->required();
    cmd_simulate->add_option("--seed", sim_seed, "master seed")->required();
    cmd_simulate->add_option("--output", sim_output, "summary JSON path");
    cmd_simulate->add_option("--csv", sim_csv, "per-replication CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_detect->parsed()) {
            if (fixed_d_opt->count() > 0) detect.fixed_d = fixed_d_value;
            if (penalty_c_opt->count() > 0) detect.penalty_c = penalty_c_value;
            return run_detect(detect);
        }
        if (cmd_sweep->parsed()) {
            const kcp::Series series = kcp::read_csv(sweep.input, sweep.header);
            const kcp::KernelSpec kernel =
                kcp::resolve_bandwidth(kernel_from_flags(sweep.kernel), series);
            const kcp::GramMatrix gram = kcp::GramMatrix::build(kernel, series);
            const std::size_t d_cap = std::min(
                sweep.d_max, series.n / std::max<std::size_t>(1, sweep.min_seg_len));
            const kcp::RiskProfile profile =
                kcp::solve_all_d(gram, d_cap, sweep.min_seg_len);
            emit(kcp::risk_profile_to_json(profile), sweep.output);
            return 0;
        }
        if (cmd_metrics->parsed()) {
            const kcp::Segmentation t1 = kcp::segmentation_from_csv_string(metrics_t1);
            const kcp::Segmentation t2 = kcp::segmentation_from_csv_string(metrics_t2);
            if (t1.n() != t2.n())
                throw kcp::invalid_input("segmentations must share the same n");
            emit(losses_report(t1, t2), metrics_output);
            return 0;
        }
        if (cmd_verify->parsed()) {
            const kcp::VerifyReport report =
                kcp::run_verify_battery(verify_seed, verify_instances, verify_trials);
            emit(kcp::verify_report_to_json(report), verify_output);
            return report.all_passed ? 0 : 1;
        }
        if (cmd_simulate->parsed()) {
            std::ifstream in(sim_config_path);
            if (!in)
                throw kcp::invalid_input("cannot open config file: " + sim_config_path);
            json config_json;
            try {
                config_json = json::parse(in);
            } catch (const json::parse_error& e) {
                throw kcp::invalid_input(std::string("config is not valid JSON: ") +
                                         e.what());
            }
            kcp::ExperimentConfig config =
                kcp::experiment_config_from_json(config_json);
            config.master_seed = sim_seed;
            const kcp::ExperimentResult result = kcp::run_experiment(config);

            json summary = kcp::experiment_summary_to_json(result);
            summary["master_seed"] = config.master_seed;
            try {
                const kcp::SlopeFit fit =
                    kcp::slope_regression(result, config.regression_threshold);
                summary["slope"] = fit.slope;
                summary["intercept"] = fit.intercept;
            } catch (const kcp::invalid_input& e) {
                summary["slope"] = nullptr;
                summary["intercept"] = nullptr;
                summary["regression_error"] = e.what();
            }
            if (!sim_csv.empty()) {
                std::ofstream csv(sim_csv);
                if (!csv)
                    throw kcp::invalid_input("cannot open csv output: " + sim_csv);
                kcp::write_experiment_csv(csv, result);
            }
            emit(summary, sim_output);
            return 0;
        }
    } catch (const kcp::infeasible& e) {
        std::cerr << "error: " << e.what() << std::endl;
        std::cout << kcp::error_to_json("infeasible", e.what()).dump(2) << std::endl;
        return 4;
    } catch (const kcp::invalid_input& e) {
        std::cerr << "error: " << e.what() << std::endl;
        std::cout << kcp::error_to_json("data", e.what()).dump(2) << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        std::cout << kcp::error_to_json("internal", e.what()).dump(2) << std::endl;
        return 1;
    }
    return 2;
}

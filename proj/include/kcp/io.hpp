#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcp/errors.hpp"
#include "kcp/kernel.hpp"
#include "kcp/segmentation.hpp"
#include "kcp/segmenter.hpp"
#include "kcp/series.hpp"
#include "kcp/simulate.hpp"
#include "kcp/verify.hpp"

namespace kcp {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// CSV input: one observation per row, columns are dimensions, no header
// unless skip_header is set.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_cell(const std::string& cell, std::size_t line_no) {
    const std::string t = trim(cell);
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw invalid_input("csv: non-numeric cell '" + cell + "' on line " +
                            std::to_string(line_no));
    return value;
}

}  // namespace detail

inline Series parse_csv(std::istream& in, bool skip_header = false) {
    std::vector<double> data;
    std::size_t width = 0, rows = 0, line_no = 0;
    std::string line;
    bool pending_header = skip_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        if (pending_header) {
            pending_header = false;
            continue;
        }
        std::size_t cols = 0;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            data.push_back(detail::parse_cell(cell, line_no));
            ++cols;
        }
        if (width == 0)
            width = cols;
        else if (cols != width)
            throw invalid_input("csv: ragged row on line " +
                                std::to_string(line_no) + " (expected " +
                                std::to_string(width) + " columns, got " +
                                std::to_string(cols) + ")");
        ++rows;
    }
    if (rows == 0) throw invalid_input("csv: no data rows");
    return Series(rows, width, std::move(data));
}

inline Series read_csv(const std::string& path, bool skip_header = false) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open input file: " + path);
    return parse_csv(in, skip_header);
}

// ---------------------------------------------------------------------------
// Kernel spec <-> JSON: {"family": "...", "degree": int?, "bandwidth": real
// or "median"}.
// ---------------------------------------------------------------------------

inline json kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    j["family"] = to_string(spec.family);
    if (spec.family == KernelFamily::polynomial) j["degree"] = spec.degree;
    if (spec.family == KernelFamily::gaussian ||
        spec.family == KernelFamily::laplace) {
        if (spec.median_bandwidth)
            j["bandwidth"] = "median";
        else
            j["bandwidth"] = spec.bandwidth;
    }
    return j;
}

inline KernelSpec kernel_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw invalid_input("kernel spec: expected an object with a 'family' key");
    KernelSpec spec;
    spec.family = kernel_family_from_string(j.at("family").get<std::string>());
    if (j.contains("degree")) spec.degree = j.at("degree").get<int>();
    if (j.contains("bandwidth")) {
        const json& b = j.at("bandwidth");
        if (b.is_string()) {
            if (b.get<std::string>() != "median")
                throw invalid_input("kernel spec: bandwidth must be a number or \"median\"");
            spec.median_bandwidth = true;
        } else {
            spec.bandwidth = b.get<double>();
        }
    }
    validate(spec);
    return spec;
}

// ---------------------------------------------------------------------------
// Segmentations and risk profiles
// ---------------------------------------------------------------------------

inline json segmentation_to_json(const Segmentation& tau) {
    return json(tau.boundaries());
}

inline Segmentation segmentation_from_json(const json& j) {
    if (!j.is_array())
        throw invalid_input("segmentation: expected an array of boundaries");
    return Segmentation(j.get<std::vector<std::size_t>>());
}

/// Parses "0,8,17,19" into a segmentation.
inline Segmentation segmentation_from_csv_string(const std::string& text) {
    std::vector<std::size_t> bounds;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const std::string t = detail::trim(cell);
        std::size_t value = 0;
        const auto [ptr, ec] =
            std::from_chars(t.data(), t.data() + t.size(), value);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            throw invalid_input("boundary list: bad integer '" + cell + "'");
        bounds.push_back(value);
    }
    return Segmentation(std::move(bounds));
}

inline json risk_profile_to_json(const RiskProfile& profile) {
    json per_d = json::array();
    for (const auto& entry : profile.per_d)
        per_d.push_back({{"d", entry.d},
                         {"risk", entry.risk},
                         {"boundaries", entry.segmentation.boundaries()}});
    return json{{"min_seg_len", profile.min_seg_len}, {"per_d", per_d}};
}

// ---------------------------------------------------------------------------
// Experiment config and results
// ---------------------------------------------------------------------------

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig config;
    const json& gen = j.at("generator");
    const std::string kind = gen.at("type").get<std::string>();
    if (kind == "piecewise_mean") {
        config.generator.kind = GeneratorSpec::Kind::piecewise_mean;
        config.generator.which = gen.at("which").get<int>();
        if (gen.contains("sigma"))
            config.generator.sigma = gen.at("sigma").get<double>();
    } else if (kind == "modes_mixture") {
        config.generator.kind = GeneratorSpec::Kind::modes_mixture;
        if (gen.contains("delta"))
            config.generator.delta = gen.at("delta").get<double>();
    } else {
        throw invalid_input("experiment config: unknown generator type '" + kind + "'");
    }

    config.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    config.repetitions = j.at("repetitions").get<std::size_t>();
    config.kernel = kernel_spec_from_json(j.at("kernel"));

    const json& sel = j.at("selection");
    const std::string mode = sel.at("type").get<std::string>();
    if (mode == "auto_penalty") {
        config.selection.mode = SelectionMode::auto_penalty;
        if (sel.contains("c_grid"))
            config.selection.c_grid = sel.at("c_grid").get<std::vector<double>>();
    } else if (mode == "fixed_d") {
        config.selection.mode = SelectionMode::fixed_d;
        config.selection.d = sel.at("d").get<std::size_t>();
        if (sel.contains("delta_n"))
            config.selection.delta_n = sel.at("delta_n").get<double>();
    } else if (mode == "fixed_c") {
        config.selection.mode = SelectionMode::fixed_c;
        config.selection.c = sel.at("c").get<double>();
    } else {
        throw invalid_input("experiment config: unknown selection type '" + mode + "'");
    }

    if (j.contains("master_seed"))
        config.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("regression_threshold"))
        config.regression_threshold = j.at("regression_threshold").get<std::size_t>();
    if (j.contains("d_max")) config.d_max = j.at("d_max").get<std::size_t>();
    if (j.contains("min_seg_len"))
        config.min_seg_len = j.at("min_seg_len").get<std::size_t>();
    return config;
}

inline void write_experiment_csv(std::ostream& out,
                                 const ExperimentResult& result) {
    out << "n,rep,loss,d_hat\n";
    for (const auto& rec : result.records)
        out << rec.n << ',' << rec.rep << ',' << rec.loss << ',' << rec.d_hat
            << '\n';
}

inline json experiment_summary_to_json(const ExperimentResult& result) {
    json per_n = json::array();
    for (const auto& row : result.summary)
        per_n.push_back({{"n", row.n},
                         {"mean", row.mean},
                         {"std", row.stddev},
                         {"stderr", row.std_error}});
    return json{{"per_n", per_n}};
}

inline json verify_report_to_json(const VerifyReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        json entry{{"name", c.name},
                   {"instances", c.instances},
                   {"violations", c.violations},
                   {"passed", c.passed}};
        if (!c.detail.empty()) entry["detail"] = c.detail;
        checks.push_back(entry);
    }
    return json{{"checks", checks}, {"all_passed", report.all_passed}};
}

inline json error_to_json(const std::string& code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace kcp

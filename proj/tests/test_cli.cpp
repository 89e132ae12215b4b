#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kcp/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = KCP_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    json output;
    bool valid_json = false;
};

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("kcp_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path out = temp_dir() / "stdout.json";
    const std::string command =
        cli + " " + args + " > " + out.string() + " 2> /dev/null";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(status);
    std::ifstream in(out);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (!text.empty()) {
        try {
            result.output = json::parse(text);
            result.valid_json = true;
        } catch (const json::parse_error&) {
        }
    }
    return result;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

}  // namespace

TEST_CASE("detect with a fixed number of segments") {
    const fs::path csv = write_file("step.csv", "0\n0\n0\n5\n5\n5\n");
    const RunResult r =
        run("detect " + csv.string() + " --kernel linear --fixed-d 2");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.valid_json);
    CHECK(r.output["boundaries"] == json::array({0, 3, 6}));
    CHECK(r.output["d_hat"] == 2);
    CHECK(r.output["risk"].get<double>() == Catch::Approx(0.0).margin(1e-12));
    CHECK(r.output.contains("m_squared"));
    CHECK(r.output["penalty_c"].is_null());
    CHECK(r.output["per_d"].is_array());
}

TEST_CASE("detect with automatic penalty calibration on constant data") {
    const fs::path csv = write_file("flat.csv", "2\n2\n2\n2\n2\n2\n2\n2\n");
    const RunResult r = run("detect " + csv.string() + " --kernel linear");
    CHECK(r.exit_code == 4);  // no dimension jump: infeasible configuration
    REQUIRE(r.valid_json);
    CHECK(r.output.contains("error"));
    CHECK(r.output["error"]["code"] == "infeasible");
}

TEST_CASE("detect rejects malformed csv input") {
    const fs::path ragged = write_file("ragged.csv", "1,2\n3\n");
    CHECK(run("detect " + ragged.string()).exit_code == 3);

    const fs::path text = write_file("text.csv", "1\nfoo\n");
    CHECK(run("detect " + text.string()).exit_code == 3);

    CHECK(run("detect /nonexistent/file.csv").exit_code == 3);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("detect").exit_code == 2);
    CHECK(run("unknown-subcommand").exit_code == 2);
    const fs::path csv = write_file("two.csv", "1\n2\n");
    CHECK(run("detect " + csv.string() + " --fixed-d 2 --penalty-c 1.0").exit_code ==
          2);
    CHECK(run("simulate missing-seed.json").exit_code == 2);
}

TEST_CASE("detect accepts multi-column observations") {
    const fs::path csv =
        write_file("vec.csv", "0,0\n0,0\n0,0\n5,5\n5,5\n5,5\n");
    const RunResult r =
        run("detect " + csv.string() + " --kernel linear --fixed-d 2");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output["n"] == 6);
    CHECK(r.output["boundaries"] == json::array({0, 3, 6}));
}

TEST_CASE("detect honors the header flag") {
    const fs::path csv = write_file("header.csv", "value\n0\n0\n5\n5\n");
    const RunResult r =
        run("detect " + csv.string() + " --header --kernel linear --fixed-d 2");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output["boundaries"] == json::array({0, 2, 4}));
}

TEST_CASE("median bandwidth sentinel resolves against the input series") {
    const fs::path csv = write_file("median.csv", "0\n0\n0\n5\n5\n5\n");
    const RunResult r = run("detect " + csv.string() +
                            " --kernel gaussian --bandwidth median --fixed-d 2");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output["kernel"]["bandwidth"].get<double>() == 5.0);
    CHECK(r.output["boundaries"] == json::array({0, 3, 6}));

    // constant data has no positive median pairwise distance
    const fs::path flat = write_file("median_flat.csv", "2\n2\n2\n2\n");
    CHECK(run("detect " + flat.string() + " --kernel gaussian --fixed-d 2")
              .exit_code == 3);
}

TEST_CASE("infeasible selection parameters exit with code 4") {
    const fs::path csv = write_file("four.csv", "1\n2\n3\n4\n");
    const RunResult r =
        run("detect " + csv.string() + " --fixed-d 3 --delta-n 0.5");
    CHECK(r.exit_code == 4);
}

TEST_CASE("sweep emits the risk profile") {
    const fs::path csv = write_file("sweep.csv", "0\n0\n0\n5\n5\n5\n");
    const RunResult r =
        run("sweep " + csv.string() + " --kernel linear --d-max 3");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.valid_json);
    CHECK(r.output["min_seg_len"] == 1);
    const json& per_d = r.output["per_d"];
    REQUIRE(per_d.size() == 3);
    CHECK(per_d[0]["d"] == 1);
    CHECK(per_d[0]["risk"].get<double>() > 0.0);
    CHECK(per_d[1]["risk"].get<double>() == Catch::Approx(0.0).margin(1e-12));
    CHECK(per_d[1]["boundaries"] == json::array({0, 3, 6}));
    CHECK(per_d[2]["risk"].get<double>() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("metrics reproduces the worked-example losses") {
    const RunResult r = run("metrics 0,8,17,19 0,7,14,19");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.valid_json);
    CHECK(r.output["d_inf_1"]["t1_t2"] == 3);
    CHECK(r.output["d_inf_1"]["t2_t1"] == 3);
    CHECK(r.output["d_inf_2"]["t1_t2"] == 2);
    CHECK(r.output["d_inf_2"]["t2_t1"] == 3);
    CHECK(r.output["d_inf_3"] == 3);
    CHECK(r.output["hausdorff_1"] == 3);
    CHECK(r.output["hausdorff_2"] == 3);
    CHECK(r.output.contains("frobenius"));
    CHECK(r.output["loss_equalities"]["condition_i"] == false);
    CHECK(r.output["loss_equivalence"].is_object());
}

TEST_CASE("metrics validates boundary lists") {
    CHECK(run("metrics 0,8,17,19 0,7,14,20").exit_code == 3);
    CHECK(run("metrics 0,x,19 0,7,19").exit_code == 3);
    CHECK(run("metrics 5,10 0,10").exit_code == 3);
}

TEST_CASE("detect output round-trips into metrics") {
    const fs::path csv = write_file("round.csv", "0\n0\n0\n5\n5\n5\n");
    const fs::path out = temp_dir() / "round.json";
    const RunResult r = run("detect " + csv.string() +
                            " --kernel linear --fixed-d 2 --output " +
                            out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    const json detect_result = json::parse(in);
    std::string bounds;
    for (const auto& b : detect_result["boundaries"]) {
        if (!bounds.empty()) bounds += ",";
        bounds += std::to_string(b.get<std::size_t>());
    }
    const RunResult m = run("metrics " + bounds + " " + bounds);
    REQUIRE(m.exit_code == 0);
    CHECK(m.output["d_inf_1"]["t1_t2"] == 0);
}

TEST_CASE("detect locates the mixture mode change with a narrow bandwidth") {
    // modes-mixture series, n = 200: true boundaries at floor(n/3) = 66 and
    // floor(2n/3) = 133; the narrow-bandwidth gaussian kernel should place
    // the fixed-d boundaries within +-10 of them
    const auto [series, truth] = kcp::gen_modes_mixture(200, 0.999, 20260810);
    std::ostringstream csv;
    for (std::size_t i = 0; i < series.n; ++i) csv << series.data[i] << "\n";
    const fs::path path = write_file("modes.csv", csv.str());
    const RunResult r = run("detect " + path.string() +
                            " --kernel gaussian --bandwidth 0.01 --fixed-d 3");
    REQUIRE(r.exit_code == 0);
    const auto bounds = r.output["boundaries"].get<std::vector<long>>();
    REQUIRE(bounds.size() == 4);
    CHECK(std::abs(bounds[1] - 66) <= 10);
    CHECK(std::abs(bounds[2] - 133) <= 10);
}

TEST_CASE("verify battery runs and reports per-lemma results") {
    const RunResult r = run("verify --instances 50 --trials 10000 --seed 7");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.valid_json);
    CHECK(r.output["all_passed"] == true);
    REQUIRE(r.output["checks"].is_array());
    bool found_identity = false;
    for (const auto& check : r.output["checks"]) {
        CHECK(check["passed"] == true);
        if (check["name"] == "risk_decomposition_identity") found_identity = true;
    }
    CHECK(found_identity);
}

TEST_CASE("simulate runs a small seeded experiment") {
    const json config = {
        {"generator", {{"type", "piecewise_mean"}, {"which", 1}, {"sigma", 0.0}}},
        {"n_grid", {40, 80}},
        {"repetitions", 2},
        {"kernel", {{"family", "gaussian"}, {"bandwidth", 0.1}}},
        {"selection", {{"type", "fixed_d"}, {"d", 5}}},
    };
    const fs::path config_path = write_file("sim.json", config.dump());
    const fs::path csv_path = temp_dir() / "sim.csv";
    const RunResult r = run("simulate " + config_path.string() +
                            " --seed 42 --csv " + csv_path.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.valid_json);
    CHECK(r.output["master_seed"] == 42);
    REQUIRE(r.output["per_n"].size() == 2);
    CHECK(r.output["per_n"][0]["mean"].get<double>() == 0.0);
    // zero losses make the log-log regression undefined
    CHECK(r.output["slope"].is_null());
    CHECK(r.output.contains("regression_error"));

    std::ifstream csv(csv_path);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "n,rep,loss,d_hat");
}

TEST_CASE("simulate rejects bad configs") {
    const fs::path bad = write_file("bad.json", "{not json");
    CHECK(run("simulate " + bad.string() + " --seed 1").exit_code == 3);
    CHECK(run("simulate /nonexistent.json --seed 1").exit_code == 3);
}

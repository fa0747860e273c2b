#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = duo::cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "duo_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

const char* small_experiment = R"({
  "channel": {"type": "bec", "epsilon": 0.5},
  "h": "canonical",
  "n": 64,
  "denoisers": {"type": "bec_parity_pair"},
  "trials": 10,
  "epsilons": [0.25],
  "master_seed": 3
})";

}  // namespace

TEST(Cli, VerifySuite) {
    const Result r = run({"verify", "--suite", "unbiasedness"});
    EXPECT_EQ(r.code, duo::cli::exit_ok);
    EXPECT_NE(r.out.find("[PASS]"), std::string::npos);
    EXPECT_EQ(run({"verify", "--suite", "nonsense"}).code, duo::cli::exit_validation);
}

TEST(Cli, UnknownFlagAndMissingSubcommand) {
    EXPECT_EQ(run({"estimate", "--frobnicate"}).code, duo::cli::exit_validation);
    EXPECT_EQ(run({}).code, duo::cli::exit_validation);
    EXPECT_EQ(run({"--help"}).code, duo::cli::exit_ok);
}

TEST(Cli, EstimateBecExample) {
    const Result r = run({"estimate", "--channel", R"({"type":"bec","epsilon":0.5})", "--h", "canonical",
                          "--denoiser", R"({"type":"bec_parity","variant":2})", "--z", "0,2,0,2", "--x", "0000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("estimate").get<double>(), 0.0);
    EXPECT_EQ(j.at("loss").get<double>(), 0.5);
    EXPECT_EQ(j.at("output"), json::parse("[0,1,0,1]"));
}

TEST(Cli, EstimateSmoothed) {
    const Result r = run({"estimate", "--denoiser", R"({"type":"smoothed","inner":{"type":"identity"},"q":0.1,"mode":"exact"})",
                          "--z", "0,1,1,0,1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("smoothed_estimate").get<double>(), 0.2 + 0.1 * 0.6, 1e-12);
}

TEST(Cli, MalformedInputs) {
    EXPECT_EQ(run({"estimate", "--denoiser", "{not json", "--z", "01"}).code, duo::cli::exit_validation);
    EXPECT_EQ(run({"estimate", "--denoiser", R"({"type":"identity"})", "--z", "0,5"}).code, duo::cli::exit_validation);
    EXPECT_EQ(run({"experiment", "--config", R"({"channel":{"type":"bsc","delta":0.2},"n":4})"}).code,
              duo::cli::exit_validation);
    EXPECT_EQ(run({"experiment", "--config", "/nonexistent/config.json"}).code, duo::cli::exit_validation);
}

TEST(Cli, Combine) {
    const Result r = run({"combine", "--channel", R"({"type":"bec","epsilon":0.5})", "--h", "canonical", "--denoisers",
                          R"({"type":"bec_parity_pair"})", "--z", "0,2,0,2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.at("selection").at("chosen_index"), 2);
    EXPECT_EQ(j.at("output"), json::parse("[0,1,0,1]"));
    const Result rnd = run({"combine", "--denoisers", R"({"type":"bsc_counterexample_pair","delta":0.2})", "--z",
                            "0,1,0,0,1,1,0,0", "--smoothing", R"({"q":0.1,"mode":"exact"})"});
    ASSERT_EQ(rnd.code, 0) << rnd.err;
    EXPECT_EQ(json::parse(rnd.out).at("combiner"), "randomized");
}

TEST(Cli, ExperimentCsvAndAggregate) {
    const auto dir = temp_dir();
    const auto cfg_path = dir / "bec.json";
    std::ofstream(cfg_path) << small_experiment;
    const auto csv_path = dir / "r.csv";
    const auto agg_path = dir / "agg.json";
    const Result r = run({"experiment", "--config", cfg_path.string(), "--out", csv_path.string(), "--aggregate",
                          agg_path.string(), "--threads", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream csv(csv_path);
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "trial,seed,parity,loss_d1,loss_d2,est_d1,est_d2,chosen,loss_combined");
    const json agg = json::parse(r.out);
    EXPECT_TRUE(agg.at("regret").contains("standard_error"));
    std::ifstream agg_file(agg_path);
    EXPECT_EQ(json::parse(agg_file), agg);

    const auto json_path = dir / "r.json";
    ASSERT_EQ(run({"experiment", "--config", cfg_path.string(), "--out", json_path.string()}).code, 0);
    std::ifstream jf(json_path);
    EXPECT_EQ(json::parse(jf).at("records").size(), 10u);
}

TEST(Cli, RelativeCleanSourceFile) {
    const auto dir = temp_dir() / "relative";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "clean.txt") << "0101\n0011\n";
    std::ofstream(dir / "cfg.json") << R"({"channel":{"type":"bsc","delta":0.2},"n":8,
        "clean_source":{"type":"file","path":"clean.txt"},
        "denoisers":[{"type":"identity"},{"type":"parity"}],"trials":3})";
    const Result r = run({"experiment", "--config", (dir / "cfg.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("trials"), 3);
}

TEST(Cli, ShippedConfigsParse) {
    for (const char* name : {"bec_counterexample.json", "bsc_counterexample.json", "thm1.json"}) {
        std::ifstream in(std::filesystem::path(DUO_CONFIG_DIR) / name);
        ASSERT_TRUE(in) << name;
        json j = json::parse(in);
        j["trials"] = 2;
        j["n"] = 64;
        const Result r = run({"experiment", "--config", j.dump()});
        ASSERT_EQ(r.code, 0) << name << ": " << r.err;
        EXPECT_TRUE(json::parse(r.out).contains("regret"));
    }
}

TEST(Cli, Influence) {
    const Result r = run({"influence", "--denoiser", R"({"type":"smoothed","inner":{"type":"parity"},"q":0.25,"mode":"exact"})",
                          "--z", "01101001", "--i", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("pointwise").at("value").get<double>(), 0.03125, 1e-15);
}

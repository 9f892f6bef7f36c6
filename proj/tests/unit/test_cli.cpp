#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "scpkit/scenario_io.hpp"
#include "scpkit_cli/cli.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = scp::cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kExamples = SCP_EXAMPLES_DIR;
const std::string kTestbed = kExamples + "/testbed_route.json";

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("scpkit_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                   ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name, const std::string& content = "") const {
        const auto p = path_ / name;
        if (!content.empty()) std::ofstream(p) << content;
        return p.string();
    }

private:
    fs::path path_;
};

std::string single_hop_scenario(double density) {
    json j = {{"seed", 3},
              {"layers", {{{"id", "Ground"}, {"alpha", 2.9}, {"eve_density", density}, {"k_db_mean", 7.0},
                           {"k_db_var", 4.0}, {"link_distance_km", {10, 30}}}}},
              {"route", {{"hops", {{{"layer", "Ground"}, {"distance_km", 20.0}, {"k_factor", 5.0}}}}}}};
    return j.dump();
}

TEST(CliEval, TestbedReportIsStable) {
    const CliResult a = run({"eval", kTestbed});
    const CliResult b = run({"eval", kTestbed});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const json j = json::parse(a.out);
    EXPECT_EQ(j["layers"].size(), 4u);
    const double rician = j["end_to_end"]["rician"];
    EXPECT_NEAR(rician, scp::end_to_end_scp_rician(scp::load_scenario(kTestbed)), 1e-15);
    EXPECT_GT(rician, j["end_to_end"]["rayleigh_multi"].get<double>());
}

TEST(CliEval, NoEavesdroppersAndSingleHop) {
    TempDir dir;
    const CliResult quiet = run({"eval", dir.file("quiet.json", single_hop_scenario(0.0))});
    ASSERT_EQ(quiet.code, 0) << quiet.err;
    for (const auto& [model, value] : json::parse(quiet.out)["end_to_end"].items()) EXPECT_EQ(value, 1.0) << model;

    const CliResult one = run({"eval", dir.file("one.json", single_hop_scenario(1e-10))});
    ASSERT_EQ(one.code, 0) << one.err;
    const json j = json::parse(one.out);
    EXPECT_EQ(j["end_to_end"]["rayleigh_multi"], j["end_to_end"]["rayleigh_single"]);
}

TEST(CliEval, InputErrorsExitTwo) {
    TempDir dir;
    const CliResult missing = run({"eval", dir.file("absent.json")});
    EXPECT_EQ(missing.code, scp::cli::kExitInput);
    const CliResult bad = run({"eval", dir.file("bad.json", R"({"layers": [{"id": "G"}], "route": {"hops": []}})")});
    EXPECT_EQ(bad.code, scp::cli::kExitInput);
    EXPECT_NE(bad.err.find("alpha"), std::string::npos) << bad.err;
    EXPECT_EQ(run({}).code, scp::cli::kExitInput);
    EXPECT_EQ(run({"frobnicate"}).code, scp::cli::kExitInput);
}

TEST(CliMc, SeededRunsAreIdentical) {
    const CliResult a = run({"mc", kTestbed, "--trials", "3000", "--seed", "5", "--threads", "1"});
    const CliResult b = run({"mc", kTestbed, "--trials", "3000", "--seed", "5", "--threads", "3"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const json j = json::parse(a.out);
    EXPECT_EQ(j["trials"], 3000);
    EXPECT_EQ(j["seed"], 5);
    EXPECT_EQ(j["per_layer_scp_hat"].size(), 4u);
}

TEST(CliMc, SingleTrialAndBadMode) {
    const CliResult one = run({"mc", kTestbed, "--trials", "1"});
    ASSERT_EQ(one.code, 0) << one.err;
    const double v = json::parse(one.out)["scp_hat"];
    EXPECT_TRUE(v == 0.0 || v == 1.0);
    EXPECT_EQ(run({"mc", kTestbed, "--mode", "sideways"}).code, scp::cli::kExitInput);
    EXPECT_EQ(run({"mc", kTestbed, "--trials", "0"}).code, scp::cli::kExitInput);
}

TEST(CliSweep, WritesCsv) {
    TempDir dir;
    const std::string spec = dir.file("k.json", R"({"parameter": "k_factor_db",
        "values": {"from": 0, "to": 14, "count": 8, "spacing": "linear"},
        "models": ["rayleigh_multi", "rician"]})");
    const std::string out = dir.file("k.csv");
    const CliResult r = run({"sweep", kTestbed, spec, "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "parameter_value,model,scp,mc_half_width");
    int lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    EXPECT_EQ(lines, 16);
}

TEST(CliSweep, MonteCarloNeedsTrials) {
    TempDir dir;
    const std::string spec = dir.file("d.json", R"({"parameter": "eve_density", "values": [1e-12],
        "models": ["monte_carlo"]})");
    EXPECT_EQ(run({"sweep", kTestbed, spec}).code, scp::cli::kExitInput);
    const CliResult ok = run({"sweep", kTestbed, spec, "--trials", "200"});
    EXPECT_EQ(ok.code, 0) << ok.err;
}

TEST(CliFit, ReportsFitAndWarnsOnRayleigh) {
    const CliResult r = run({"fit", kTestbed});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    ASSERT_EQ(j["layers"].size(), 4u);
    for (const auto& layer : j["layers"]) EXPECT_GT(layer["a_hat"].get<double>(), 0.0);

    TempDir dir;
    json rayleigh = json::parse(single_hop_scenario(1e-10));
    rayleigh["route"]["hops"][0]["k_factor"] = 0.0;
    const CliResult w = run({"fit", dir.file("r.json", rayleigh.dump()), "--out", dir.file("curve.csv")});
    ASSERT_EQ(w.code, 0) << w.err;
    EXPECT_NE(w.err.find("Rayleigh regime"), std::string::npos);
    EXPECT_EQ(json::parse(w.out)["layers"][0]["a_hat"], 0.0);
}

TEST(CliVerify, PassesWithReducedSamples) {
    const CliResult r = run({"verify", "--samples", "100000"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("160/160 checks passed"), std::string::npos);
}

TEST(CliClassify, CsvAndJson) {
    TempDir dir;
    const std::string nodes = dir.file("n.csv", "id,layer,lat,lon,alt\na,Ground,37,127,0\nb,Ground,37.1,127,0\nc,Sea,37,128,0\n");
    const std::string edges = dir.file("e.csv", "a,b\na,b\n");
    const CliResult csv = run({"classify", nodes, "--edges", edges, "--source", "a"});
    ASSERT_EQ(csv.code, 0) << csv.err;
    EXPECT_NE(csv.out.find("c,Sea,rician,0,,,0"), std::string::npos);
    const CliResult js = run({"classify", nodes, "--edges", edges, "--source", "a", "--format", "json", "--threshold", "0"});
    ASSERT_EQ(js.code, 0) << js.err;
    EXPECT_EQ(json::parse(js.out)["secure_counts"]["rician"], 2);
    EXPECT_EQ(run({"classify", nodes, "--source", "a"}).code, scp::cli::kExitInput);
    EXPECT_EQ(run({"classify", nodes, "--edges", edges, "--source", "zz"}).code, scp::cli::kExitInput);
}

TEST(CliBinary, ExitCodesFromTheExecutable) {
    TempDir dir;
    const std::string out = dir.file("eval.json");
    const std::string ok = std::string(SCP_BINARY) + " eval " + kTestbed + " --out " + out;
    EXPECT_EQ(std::system(ok.c_str()), 0);
    EXPECT_EQ(json::parse(std::ifstream(out))["layers"].size(), 4u);
    const std::string bad = std::string(SCP_BINARY) + " eval " + dir.file("nothing.json") + " 2>/dev/null";
    const int status = std::system(bad.c_str());
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), scp::cli::kExitInput);
}

}  // namespace

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "histwalk/config.hpp"

using namespace histwalk;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HISTWALK_CLI;
const std::string kConfigs = HISTWALK_CONFIGS;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("histwalk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    static std::string read(const std::string& p) {
        std::ifstream in(p);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    /// Exit code of the CLI; stdout goes to `out`.
    int run(const std::string& args, const std::string& out = "/dev/null") const {
        const std::string cmd = kCli + " " + args + " > " + out + " 2> " + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir_;
};

const char* kBadThreshold = R"({"model": {"dists": [{"kind": "gaussian", "mu": 0, "sigma2": 1},
                                                   {"kind": "gaussian", "mu": 1, "sigma2": 1}],
                                         "thresholds": [-0.5], "window": 20}})";

const char* kTie = R"({"model": {"dists": [{"kind": "gaussian", "mu": 0, "sigma2": 1},
                                          {"kind": "gaussian", "mu": 1, "sigma2": 1},
                                          {"kind": "gaussian", "mu": 2, "sigma2": 1}],
                                "thresholds": [0.4, 1.5], "window": 20}})";

} // namespace

TEST(Config, ParsesAllKinds) {
    const auto c = parse_config_text(R"({"model": {"dists": [{"kind": "rademacher", "p": 0.2},
                                                             {"kind": "discrete", "atoms": [-1, 0, 2], "weights": [0.25, 0.5, 0.25]},
                                                             {"kind": "gaussian", "mu": 2, "sigma2": 0.5}],
                                                   "thresholds": [-0.4, 0.9], "window": 7, "initial_regime": 1},
                                         "run": {"version": "instantaneous", "seed": 12, "n_grid": [5, 10]}})");
    EXPECT_EQ(c.model.levels(), 2);
    EXPECT_EQ(c.model.window, 7);
    EXPECT_EQ(c.model.initial_regime, 1);
    EXPECT_NEAR(mean(c.model.dists[1]), 0.25, 1e-12);
    EXPECT_EQ(*c.run.version, Version::instantaneous);
    EXPECT_EQ(*c.run.seed, 12u);
    EXPECT_EQ(c.run.n_grid, (std::vector<int>{5, 10}));
}

TEST(Config, RejectsUnknownKeysAndBadShapes) {
    EXPECT_THROW(parse_config_text(R"({"model": {"dists": [], "thresholds": [], "window": 1}, "extra": 1})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"model": {"dists": [{"kind": "gaussian", "mu": 0, "sigma2": 1, "skew": 2},
                                                          {"kind": "gaussian", "mu": 1, "sigma2": 1}], "thresholds": [0.4], "window": 3}})"),
                 ConfigError);
    EXPECT_THROW(parse_config_text(R"({"model": {"dists": [{"kind": "cauchy"}], "thresholds": [], "window": 3}})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"model": {"dists": [{"kind": "gaussian", "mu": 0, "sigma2": 1}], "thresholds": [0.4], "window": 3}})"),
                 ConfigError);
    EXPECT_THROW(parse_config_text("{not json"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"model": {"dists": [{"kind": "rademacher", "p": 1.5},
                                                          {"kind": "gaussian", "mu": 1, "sigma2": 1}], "thresholds": [0.4], "window": 3}})"),
                 ConfigError);
}

TEST(Config, ShippedExamplesParse) {
    EXPECT_EQ(load_config(kConfigs + "/one_level_gaussian.json").model.levels(), 1);
    EXPECT_EQ(load_config(kConfigs + "/two_level_gaussian.json").model.levels(), 2);
}

TEST_F(CliTest, ValidateExitCodes) {
    EXPECT_EQ(run("validate " + kConfigs + "/one_level_gaussian.json"), 0);
    EXPECT_EQ(run("validate " + write("bad.json", kBadThreshold), path("report.json")), 1);
    const auto rep = nlohmann::json::parse(read(path("report.json")));
    EXPECT_FALSE(rep["passed"].get<bool>());
    EXPECT_EQ(rep["assumptions"][0]["name"], "A");
    EXPECT_FALSE(rep["assumptions"][0]["passed"].get<bool>());
    EXPECT_EQ(run("validate " + write("broken.json", "{\"model\": [")), 2);
    EXPECT_EQ(run("validate " + path("missing.json")), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(CliTest, PredictReportsExponentsAndTies) {
    ASSERT_EQ(run("predict " + kConfigs + "/two_level_gaussian.json", path("p.json")), 0);
    const auto p = nlohmann::json::parse(read(path("p.json")));
    EXPECT_NEAR(p["lambdas"][0].get<double>(), 0.08, 1e-12);
    EXPECT_NEAR(p["lambdas"][1].get<double>(), 0.18, 1e-12);
    EXPECT_NEAR(p["lambdas"][2].get<double>(), 0.38, 1e-12);
    EXPECT_EQ(p["predicted_speed"].get<double>(), 2.0);
    EXPECT_NEAR(p["per_regime"]["sojourn_exp"][1].get<double>(), 0.045, 1e-12);
    EXPECT_TRUE(p["per_regime"]["down_exp"][0].is_null());

    ASSERT_EQ(run("predict " + write("tie.json", kTie), path("t.json")), 0);
    const auto t = nlohmann::json::parse(read(path("t.json")));
    EXPECT_TRUE(t["predicted_speed"].is_null());
    EXPECT_EQ(t["argmax"].size(), 2u);

    EXPECT_EQ(run("predict " + write("bad.json", kBadThreshold)), 1);
}

TEST_F(CliTest, SimulateNeedsSeedAndIsReproducible) {
    const std::string cfg = kConfigs + "/one_level_gaussian.json";
    EXPECT_EQ(run("simulate " + cfg + " --steps 20000"), 2);
    ASSERT_EQ(run("simulate " + cfg + " --steps 100000 --replicas 2 --seed 7 -o " + path("a.json") + " --trace " + path("trace.csv")), 0);
    ASSERT_EQ(run("simulate " + cfg + " --steps 100000 --replicas 2 --seed 7 -o " + path("b.json")), 0);
    EXPECT_EQ(read(path("a.json")), read(path("b.json")));
    const auto rep = nlohmann::json::parse(read(path("a.json")));
    EXPECT_TRUE(rep.contains("est_speed"));
    EXPECT_EQ(rep["per_regime"].size(), 2u);
    EXPECT_TRUE(rep["per_regime"][0].contains("wald_residual"));
    const std::string trace = read(path("trace.csv"));
    EXPECT_EQ(trace.rfind("n,X_n,regime,window_avg\n", 0), 0u);
    EXPECT_FALSE(fs::exists(path("a.json.tmp")));
}

TEST_F(CliTest, SweepWritesOneRowPerWindow) {
    const std::string cfg = kConfigs + "/one_level_gaussian.json";
    ASSERT_EQ(run("sweep " + cfg + " --n-grid 10,20,40 --seed 3 --replicas 2 --min-steps 20000 -o " + path("s.csv"), path("summary.txt")), 0);
    std::istringstream csv(read(path("s.csv")));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "N,est_speed,stderr,predicted_speed,gap");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 3);
    EXPECT_NE(read(path("summary.txt")).find("N=40"), std::string::npos);
    EXPECT_EQ(run("sweep " + cfg + " --n-grid 10,20,40 --seed 3 --replicas 2 --min-steps 20000 --steps-cap 20000 -o " + path("c.csv")), 3);
}

TEST_F(CliTest, RatefnGrid) {
    ASSERT_EQ(run("ratefn " + kConfigs + "/one_level_gaussian.json --dist 1 --r-grid -1:3:0.1", path("r.csv")), 0);
    std::istringstream csv(read(path("r.csv")));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "r,I_of_r,lambda_star");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 41);
    EXPECT_EQ(run("ratefn " + kConfigs + "/one_level_gaussian.json --dist 1 --r-grid 3:1:0.1"), 2);
}

TEST_F(CliTest, ExitsBudgetAndBlocks) {
    const std::string cfg = kConfigs + "/two_level_gaussian.json";
    EXPECT_EQ(run("exits " + cfg + " --regime 0 --n-grid 20,30,40 --samples 200 --cap 41 --seed 1"), 3);
    EXPECT_EQ(run("exits " + cfg + " --regime 1 --n-grid 5,10,15 --samples 500 --seed 1", path("e.json")), 0);
    EXPECT_TRUE(nlohmann::json::accept(read(path("e.json"))));
    EXPECT_EQ(run("blocks " + cfg + " --regime 0 --n-grid 5,10,15 --samples 1000 --seed 1"), 1);
    EXPECT_EQ(run("blocks " + cfg + " --regime 1 --n-grid 2,4,6 --samples 20000 --seed 1", path("b.json")), 0);
    EXPECT_EQ(run("persistence " + cfg + " --regime 1 --horizon 100 --samples 1000 --seed 1", path("p.json")), 0);
    const auto p = nlohmann::json::parse(read(path("p.json")));
    EXPECT_GT(p["estimate"].get<double>(), 0.0);
}

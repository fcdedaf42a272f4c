#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "freeknot/cli.hpp"

namespace fs = std::filesystem;
namespace cli = freeknot::cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("freeknot_cli_") + info->name());
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, DistCheckPassesOnCorrectBuild) {
    const Result r = run({"dist-check"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS series agreement"), std::string::npos);
}

TEST_F(CliTest, KnotStatsScaledMeanNearReference) {
    const Result r = run({"knot-stats", "--eps", "0.05", "--reps", "10000", "--seed", "7", "--out", out("a")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(dir_ / "a" / "knot_stats.csv");
    std::istringstream in(csv);
    std::string comment, header, row;
    std::getline(in, comment);
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(comment, "# freeknot knot-stats seed=7 eps=0.050000000000000003 reps=10000");
    EXPECT_EQ(header.substr(0, 40), "eps,reps,mean_knots,var_knots,scaled_mea");
    std::vector<std::string> cells;
    std::istringstream cs(row);
    for (std::string c; std::getline(cs, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 10u);
    EXPECT_NEAR(std::stod(cells[4]), 0.5865, 0.05 * 0.5865);
    EXPECT_EQ(cells[9], "7");
}

TEST_F(CliTest, SimulateTwiceGivesIdenticalFiles) {
    const std::vector<std::string> base{"simulate", "--sde", "gbm", "--mu", "0.1", "--sigma0", "0.5",
                                        "--eps", "0.1", "--seed", "1", "--n", "20000"};
    auto a = base;
    a.insert(a.end(), {"--out", out("a")});
    auto b = base;
    b.insert(b.end(), {"--out", out("b")});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    for (const char* f : {"simulate_knots.csv", "simulate_segments.csv"}) {
        const std::string x = slurp(dir_ / "a" / f);
        EXPECT_FALSE(x.empty());
        EXPECT_EQ(x, slurp(dir_ / "b" / f)) << f;
        EXPECT_EQ(x.rfind("# freeknot simulate sde=gbm", 0), 0u);
        EXPECT_NE(x.find("seed=1"), std::string::npos);
    }
}

TEST_F(CliTest, ExistingOutputNeedsForce) {
    const std::vector<std::string> args{"tau-sample", "--reps", "100", "--out", out("t")};
    EXPECT_EQ(run(args).code, 0);
    const Result again = run(args);
    EXPECT_EQ(again.code, 1);
    EXPECT_NE(again.err.find("--force"), std::string::npos);
    auto forced = args;
    forced.push_back("--force");
    EXPECT_EQ(run(forced).code, 0);
}

TEST_F(CliTest, TauSampleReportsMeanAndWritesSamples) {
    const Result r = run({"tau-sample", "--reps", "2000", "--seed", "3", "--out", out("t")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("14 zeta(3)/pi^2 1.705114"), std::string::npos) << r.out;
    const std::string csv = slurp(dir_ / "t" / "tau_samples.csv");
    EXPECT_EQ(csv.rfind("# freeknot tau-sample seed=3 reps=2000", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2002);
}

TEST_F(CliTest, UnknownSubcommandOrFlagIsUsageError) {
    const Result a = run({"bogus"});
    EXPECT_EQ(a.code, 1);
    EXPECT_NE(a.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({"knot-stats", "--what", "1"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ConfigurationErrorsExitOne) {
    EXPECT_EQ(run({"simulate", "--eps", "0.01", "--n", "5000", "--out", out("s")}).code, 1);
    EXPECT_EQ(run({"convergence", "--eps", "0.05,0.1", "--out", out("c")}).code, 1);
    EXPECT_EQ(run({"euler-baseline", "--k", "64,100", "--out", out("e")}).code, 1);
    EXPECT_EQ(run({"simulate", "--sde", "heston", "--out", out("s")}).code, 1);
    EXPECT_EQ(run({"knot-stats", "--reps", "1", "--out", out("k")}).code, 1);
}

TEST_F(CliTest, NumericFailureExitsTwo) {
    // GBM with a huge volatility overflows the Milstein recursion.
    const Result r = run({"convergence", "--sigma0", "1e200", "--x0", "1e200", "--eps", "0.1", "--reps", "2",
                          "--n", "5000", "--out", out("c")});
    EXPECT_EQ(r.code, 2) << r.err;
}

TEST_F(CliTest, ConfigFileEqualsFlagsAndFlagsOverride) {
    fs::create_directories(dir_);
    const fs::path ini = dir_ / "run.ini";
    {
        std::ofstream f(ini);
        f << "# knot statistics\n"
             "eps = 0.1,0.05\n"
             "reps = 300\n"
             "seed = 11\n";
    }
    ASSERT_EQ(run({"knot-stats", "--config", ini.string(), "--out", out("cfg")}).code, 0);
    ASSERT_EQ(run({"knot-stats", "--eps", "0.1,0.05", "--reps", "300", "--seed", "11", "--out", out("flags")}).code, 0);
    EXPECT_EQ(slurp(dir_ / "cfg" / "knot_stats.csv"), slurp(dir_ / "flags" / "knot_stats.csv"));

    ASSERT_EQ(run({"knot-stats", "--config", ini.string(), "--seed", "12", "--out", out("over")}).code, 0);
    EXPECT_NE(slurp(dir_ / "over" / "knot_stats.csv").find("seed=12"), std::string::npos);
}

TEST_F(CliTest, ConfigFileRejectsUnknownKeys) {
    fs::create_directories(dir_);
    const fs::path ini = dir_ / "bad.ini";
    {
        std::ofstream f(ini);
        f << "reps = 10\nbogus = 1\n";
    }
    const Result r = run({"knot-stats", "--config", ini.string(), "--out", out("k")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bogus"), std::string::npos);
    EXPECT_EQ(run({"knot-stats", "--config", (dir_ / "missing.ini").string()}).code, 1);
}

TEST_F(CliTest, ConvergenceIdenticalAcrossThreadCounts) {
    const std::vector<std::string> base{"convergence", "--eps", "0.1,0.05", "--reps", "6", "--n", "20000",
                                        "--seed", "4"};
    auto a = base;
    a.insert(a.end(), {"--threads", "1", "--out", out("one")});
    auto b = base;
    b.insert(b.end(), {"--threads", "3", "--out", out("three")});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    EXPECT_EQ(slurp(dir_ / "one" / "convergence.csv"), slurp(dir_ / "three" / "convergence.csv"));
}

TEST_F(CliTest, EulerBaselineWritesTable) {
    const Result r = run({"euler-baseline", "--k", "8,32", "--reps", "4", "--n", "1024", "--out", out("e")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(dir_ / "e" / "euler_baseline.csv");
    EXPECT_EQ(csv.rfind("# freeknot convergence method=euler", 0), 0u);
    EXPECT_NE(csv.find("\nk,e_q,stderr,ratio,ci_low,ci_high,reps,seed,normalized\n"), std::string::npos);
}

TEST_F(CliTest, OutputDirectoryDefaultsToEnvironment) {
    setenv("FREEKNOT_OUT_DIR", out("env").c_str(), 1);
    EXPECT_EQ(cli::default_output_dir(), out("env"));
    EXPECT_EQ(run({"tau-sample", "--reps", "10"}).code, 0);
    EXPECT_TRUE(fs::exists(dir_ / "env" / "tau_samples.csv"));
    unsetenv("FREEKNOT_OUT_DIR");
    EXPECT_EQ(cli::default_output_dir(), "out");
}

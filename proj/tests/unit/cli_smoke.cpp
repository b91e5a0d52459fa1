#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(RNELAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rnelab_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    cfg_ = dir_ / "small.cfg";
    std::ofstream(cfg_) << "[market]\nn_assets = 3000\n[inference]\nt_max = 2.5\n[estimation]\nbootstrap = 10\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string base(const std::string& sub) const {
    return sub + " --config " + cfg_.string() + " --out-dir " + (dir_ / sub).string();
  }

  fs::path dir_;
  fs::path cfg_;
};

}  // namespace

TEST_F(Cli, SimulateWritesPanel) {
  ASSERT_EQ(run(base("simulate")), 0);
  const auto panel = slurp(dir_ / "simulate" / "panel.csv");
  EXPECT_EQ(panel.substr(0, panel.find('\n')), "asset_id,t,pi,Pi,S,B,sign");
  EXPECT_TRUE(fs::exists(dir_ / "simulate" / "belief_paths.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "simulate" / "price_paths.csv"));
}

TEST_F(Cli, ThreadBudgetDoesNotChangeBytes) {
  ASSERT_EQ(run(base("cohorts") + " --threads 1"), 0);
  const auto a = slurp(dir_ / "cohorts" / "cohorts.csv");
  ASSERT_EQ(run(base("cohorts") + " --threads 4"), 0);
  EXPECT_EQ(a, slurp(dir_ / "cohorts" / "cohorts.csv"));
  EXPECT_FALSE(a.empty());
}

TEST_F(Cli, CurvesEmitLatticeAndPeaks) {
  ASSERT_EQ(run(base("curves") + " --grid-points 200"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "curves" / "curves_rho1_K1.5.csv"));
  const auto peaks = slurp(dir_ / "curves" / "peaks.json");
  EXPECT_NE(peaks.find("\"volatility\""), std::string::npos);
}

TEST_F(Cli, EstimateWritesReport) {
  ASSERT_EQ(run(base("estimate")), 0);
  const auto est = slurp(dir_ / "estimate" / "estimate.csv");
  EXPECT_EQ(std::count(est.begin(), est.end(), '\n'), 2);
}

TEST_F(Cli, ExitCodes) {
  std::ofstream(dir_ / "bad.cfg") << "[pricing]\nK = 0.5\n";
  EXPECT_EQ(run("simulate --config " + (dir_ / "bad.cfg").string()), 2);
  EXPECT_EQ(run("simulate --config " + (dir_ / "missing.cfg").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  std::ofstream(dir_ / "huge.cfg") << "[market]\nn_assets = 100000000\n";
  EXPECT_EQ(run("simulate --config " + (dir_ / "huge.cfg").string() + " --out-dir " + (dir_ / "h").string()), 4);
}

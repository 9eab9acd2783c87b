#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "grouse/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(GROUSE_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("grouse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("run --mode fast").code, 1);
  EXPECT_EQ(run("run --n 5 --d 5").code, 1);
  EXPECT_EQ(run("sweep").code, 1);
  EXPECT_EQ(run("sweep --config " + write("bad.json", R"({"sigma2": 1})").string()).code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, IoErrorsExitThree) {
  write("blocker", "x");
  EXPECT_EQ(run("run --n 20 --d 2 --max-iters 10 --out " + (dir_ / "blocker" / "sub").string()).code, 3);
  EXPECT_EQ(run("bounds --out " + (dir_ / "missing" / "b.csv").string()).code, 3);
}

TEST_F(CliTest, BoundsTable) {
  const Result r = run("bounds --n 200 500 --d 5 1");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "n,d,rho,rho_prime,eps_star,C,mu0,k1,k1_from_rate,k2,k,error");
  std::getline(in, row);
  EXPECT_EQ(row.rfind("200,5,0.1,0.1,1e-04,1,0.88099806", 0), 0u) << row;
  int rows = 1;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST_F(CliTest, RunWritesTrajectoriesAndSummary) {
  const Result r = run("run --n 30 --d 2 --trials 3 --seed 4 --max-iters 400 --eps-star 1e-3 --dense --threads 2 --out " +
                       dir_.string());
  ASSERT_EQ(r.code, 0);
  for (const char* f : {"trajectory_000.csv", "trajectory_002.csv", "trials.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const std::string traj = slurp(dir_ / "trajectory_001.csv");
  EXPECT_NE(traj.find("\"sparse_ubar\":false"), std::string::npos);
  std::istringstream body(grouse::csv_body(traj));
  std::string header;
  std::getline(body, header);
  EXPECT_EQ(header, grouse::kTrajectoryCsvHeader);
}

TEST_F(CliTest, RunConfigFileAndFlagOverride) {
  const fs::path cfg = write("cfg.json", R"({"n": 30, "d": 2, "trials": 2, "max_iters": 300, "seed": 9})");
  const Result a = run("run --config " + cfg.string());
  const Result b = run("run --config " + cfg.string() + " --trials 3");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  const std::string body_a = grouse::csv_body(a.out);
  const std::string body_b = grouse::csv_body(b.out);
  // The first two trials coincide; the override adds one more row.
  EXPECT_EQ(body_b.rfind(body_a, 0), 0u);
  EXPECT_GT(body_b.size(), body_a.size());
}

TEST_F(CliTest, SweepBodiesIdenticalAcrossThreadCounts) {
  const fs::path cfg =
      write("sweep.json", R"({"base": {"trials": 3, "seed": 5, "max_iters": 2000},
                              "grid": {"n": [30, 40], "d": [2, 3]}})");
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --threads 1 --out " + (dir_ / "t1").string()).code, 0);
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --threads 8 --out " + (dir_ / "t8").string()).code, 0);
  for (const char* f : {"trials.csv", "summary.csv"}) {
    const std::string a = slurp(dir_ / "t1" / f);
    const std::string b = slurp(dir_ / "t8" / f);
    ASSERT_FALSE(grouse::csv_body(a).empty());
    EXPECT_EQ(grouse::csv_body(a), grouse::csv_body(b)) << f;
  }
}

TEST_F(CliTest, VerifyExitCodes) {
  const Result ok = run("verify --suite metrics --seed 3");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("PASS metrics/"), std::string::npos);
  const Result bad = run("verify --suite step --theta-scale 1.5");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("FAIL step/greedy_step_optimality"), std::string::npos);
  EXPECT_EQ(run("verify --suite nope").code, 1);
}

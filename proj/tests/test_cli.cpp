#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "parafem/verify.hpp"

using namespace parafem;

namespace {

const std::string kTmp = PARAFEM_TEST_TMP;

/// Runs the CLI with output captured into `log`; returns the exit status.
int run_cli(const std::string& args, const std::string& log) {
  const std::string cmd = std::string("\"") + PARAFEM_CLI + "\" " + args + " > \"" + log + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, StudyWritesCsv) {
  const std::string out = kTmp + "/cli_study.csv";
  std::remove(out.c_str());
  ASSERT_EQ(run_cli("study --problem smooth1d --levels 3 --out " + out, kTmp + "/cli_study.log"), 0);
  std::ifstream f(out);
  const ConvergenceReport r = parse_csv(f);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[2].level, 2);
  EXPECT_GT(r.rows[0].tau, 0.0);
  EXPECT_NE(slurp(kTmp + "/cli_study.log").find("rate"), std::string::npos);
}

TEST(Cli, PassingRateAssertionExitsZero) {
  EXPECT_EQ(run_cli("study --problem smooth1d --levels 3 --couple-tau --assert-rates", kTmp + "/cli_pass.log"), 0);
  EXPECT_NE(slurp(kTmp + "/cli_pass.log").find("PASS rate e_W"), std::string::npos);
}

TEST(Cli, FailingRateAssertionExitsTwo) {
  // an 8-mode truncation is smooth, so its max-in-time L2 error converges at
  // second order and breaks the ceiling asserted for the rough spectral family
  const std::string args = "study --problem spectral-p2 --modes 8 --levels 3 --couple-tau --reference-grid 64 "
                           "--tol-time 1e-3 --assert-rates";
  EXPECT_EQ(run_cli(args, kTmp + "/cli_fail.log"), 2);
  const std::string log = slurp(kTmp + "/cli_fail.log");
  EXPECT_NE(log.find("PASS rate e_W"), std::string::npos);
  EXPECT_NE(log.find("FAIL rate e_LinfL2"), std::string::npos);
}

TEST(Cli, TwoRunsProduceIdenticalCsv) {
  const std::string a = kTmp + "/cli_det_a.csv", b = kTmp + "/cli_det_b.csv";
  const std::string args = "study --problem smooth2d --levels 2 --couple-tau --out ";
  ASSERT_EQ(run_cli(args + a, kTmp + "/cli_det_a.log"), 0);
  ASSERT_EQ(run_cli(args + b, kTmp + "/cli_det_b.log"), 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, ConfigFileWithCommandLineOverride) {
  const std::string cfg = kTmp + "/cli.cfg", out = kTmp + "/cli_cfg.csv";
  std::ofstream(cfg) << "problem = smooth2d\nlevels = 3\nmode = full\nbase_steps = 2\n";
  ASSERT_EQ(run_cli("study --config " + cfg + " --levels 2 --out " + out, kTmp + "/cli_cfg.log"), 0);
  std::ifstream f(out);
  const ConvergenceReport r = parse_csv(f);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.rows[0].tau, 0.5);
  EXPECT_EQ(r.rows[0].dofs, 9);
}

TEST(Cli, SimulateThenNorms) {
  const std::string traj = kTmp + "/cli_traj.txt";
  ASSERT_EQ(run_cli("simulate --problem smooth1d --level 1 --steps 8 --out " + traj, kTmp + "/cli_sim.log"), 0);
  ASSERT_EQ(run_cli("norms --traj " + traj, kTmp + "/cli_norms.log"), 0);
  std::ifstream f(traj);
  const Trajectory t = read_trajectory(f);
  EXPECT_EQ(t.n_steps(), 8);
  const std::string log = slurp(kTmp + "/cli_norms.log");
  const auto pos = log.find("discrete_energy_norm ");
  ASSERT_NE(pos, std::string::npos);
  const double printed = std::stod(log.substr(pos + 21));
  EXPECT_NEAR(printed, discrete_energy_norm(t), 1e-12 * printed);
}

TEST(Cli, ErrorsAreReported) {
  EXPECT_EQ(run_cli("study --problem nonexistent --levels 2", kTmp + "/cli_err.log"), 1);
  EXPECT_NE(slurp(kTmp + "/cli_err.log").find("error: unknown problem"), std::string::npos);
  EXPECT_NE(run_cli("norms --traj " + kTmp + "/does_not_exist.txt", kTmp + "/cli_err2.log"), 0);
  EXPECT_NE(run_cli("", kTmp + "/cli_err3.log"), 0);
  EXPECT_NE(run_cli("study --levels 0", kTmp + "/cli_err4.log"), 0);
}

TEST(Cli, VerifyPasses) {
  ASSERT_EQ(run_cli("verify", kTmp + "/cli_verify.log"), 0);
  const std::string log = slurp(kTmp + "/cli_verify.log");
  EXPECT_EQ(log.find("FAIL"), std::string::npos);
  Index passes = 0;
  for (auto p = log.find("PASS"); p != std::string::npos; p = log.find("PASS", p + 1)) ++passes;
  EXPECT_EQ(passes, 7);
}

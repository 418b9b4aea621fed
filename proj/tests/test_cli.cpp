#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "fnlab/csv.hpp"
#include "oracles.hpp"

namespace {

int run(const std::string& args, const std::string& log = oracle::temp_path("cli.log")) {
  const std::string cmd = std::string(FNLAB_CLI) + " " + args + " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> data_rows(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    for (auto c : fnlab::csv::split(line)) cells.emplace_back(c);
    rows.push_back(cells);
  }
  return rows;
}

const std::string kTiny = "--set K=3 --set d=24 --set per_class=6 --set m=5 --set T=15 --set n_test=40 --set draw_cap=4000";

}  // namespace

TEST(Cli, GenIsByteIdenticalForSameSeed) {
  const auto a = oracle::temp_path("gen_a.csv"), b = oracle::temp_path("gen_b.csv");
  ASSERT_EQ(run("gen " + kTiny + " --seed 11 --out " + a), 0);
  ASSERT_EQ(run("gen " + kTiny + " --seed 11 --out " + b), 0);
  EXPECT_EQ(oracle::slurp(a), oracle::slurp(b));
  ASSERT_EQ(run("gen " + kTiny + " --seed 12 --out " + b), 0);
  EXPECT_NE(oracle::slurp(a), oracle::slurp(b));
}

TEST(Cli, FlagsOverrideSetOverrideFile) {
  const auto cfg = oracle::temp_path("cli.cfg");
  std::ofstream(cfg) << "seed = 5\nK = 3\nd = 24\nper_class = 2\n";
  const auto out = oracle::temp_path("gen_prec.csv");
  ASSERT_EQ(run("gen --config " + cfg + " --set seed=6 --seed 7 --out " + out), 0);
  const auto text = oracle::slurp(out);
  EXPECT_NE(text.find("seed=7"), std::string::npos);
  EXPECT_NE(text.find("per_class=2"), std::string::npos);
  EXPECT_EQ(data_rows(out).size(), 6u);  // FNDS1 line is taken as header
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const auto log = oracle::temp_path("cli_err.log");
  EXPECT_EQ(run("gen --set bogus=1 --out " + oracle::temp_path("x.csv"), log), 2);
  EXPECT_NE(oracle::slurp(log).find("valid keys"), std::string::npos);
  EXPECT_EQ(run("gen --set class_probs=0.5,0.6,0 --set K=3 --set d=24 --set per_class=0 --set n=5 --out " +
                    oracle::temp_path("x.csv"),
                log),
            2);
}

TEST(Cli, TrainWritesModelTraceAndCumulative) {
  const auto data = oracle::temp_path("train_data.csv");
  const auto dir = oracle::temp_path("train_dir");
  ASSERT_EQ(run("gen " + kTiny + " --seed 3 --out " + data), 0);
  ASSERT_EQ(run("train " + kTiny + " --seed 3 --data " + data + " --out " + dir), 0);
  EXPECT_EQ(data_rows(dir + "/trace.csv").size(), 16u);
  EXPECT_EQ(data_rows(dir + "/cumulative.csv").size(), 18u);
  ASSERT_EQ(run("longtail " + kTiny + " --seed 3 --model " + dir + "/model.csv --data " + data + " --out " +
                oracle::temp_path("flags.csv")),
            0);
  EXPECT_EQ(data_rows(oracle::temp_path("flags.csv")).size(), 18u);
}

TEST(Cli, DivergenceExitsWithThree) {
  const auto data = oracle::temp_path("div_data.csv");
  ASSERT_EQ(run("gen " + kTiny + " --set feature_norm=3 --out " + data), 0);
  EXPECT_EQ(run("train " + kTiny + " --set feature_norm=3 --set eta=1e308 --data " + data + " --out " +
                oracle::temp_path("div_dir")),
            3);
}

TEST(Cli, BoundsAtUnitRatioIsInverseE) {
  const auto out = oracle::temp_path("bounds.csv");
  ASSERT_EQ(run("bounds --set K=2 --set d=12 --set gamma_ratio=1 --set per_class=10 --out " + out), 0);
  const auto rows = data_rows(out);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_NEAR(std::stod(r[6]), std::exp(-1.0), 1e-12);
}

TEST(Cli, InfluenceOfIdenticalRowsIsZero) {
  const auto in = oracle::temp_path("ident.csv");
  std::ofstream f(in);
  for (int i = 0; i < 6; ++i) f << (i % 2) << ",1.5,-2,0.25\n";
  f.close();
  const auto out = oracle::temp_path("ident_scores.csv");
  ASSERT_EQ(run("influence --input " + in + " --out " + out), 0);
  const auto rows = data_rows(out);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) EXPECT_EQ(std::stod(r[2]), 0.0);
}

TEST(Cli, InfluenceNeedsExactlyOneSource) {
  EXPECT_NE(run("influence --out " + oracle::temp_path("none.csv")), 0);
}

TEST(Cli, SweepIsIndependentOfWorkers) {
  const std::string grid = kTiny + " --set axis1_values=0.5,2 --set axis2_values=1,30 --set longtail_eval=0";
  const auto a = oracle::temp_path("cli_sweep1.csv"), b = oracle::temp_path("cli_sweep3.csv");
  ASSERT_EQ(run("sweep " + grid + " --workers 1 --out " + a), 0);
  ASSERT_EQ(run("sweep " + grid + " --workers 3 --out " + b), 0);
  EXPECT_EQ(oracle::slurp(a), oracle::slurp(b));
  EXPECT_EQ(data_rows(a).size(), 4u);
  EXPECT_EQ(data_rows(oracle::temp_path("cli_sweep1_timing.csv")).size(), 4u);
}

TEST(Cli, RemoveEvalBaselineAndSides) {
  const auto out = oracle::temp_path("remove.csv");
  ASSERT_EQ(run("remove-eval " + kTiny + " --set gamma_ratio=100 --set fractions=0,0.2 --out " + out), 0);
  const auto rows = data_rows(out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][1], "none");
  for (const auto& r : rows)
    if (r[0] == "0") {
      EXPECT_EQ(std::stod(r[6]), 0.0);
      EXPECT_EQ(std::stod(r[7]), 0.0);
    }
}

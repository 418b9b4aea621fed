#include <gtest/gtest.h>

#include <cmath>

#include "fnlab/experiment.hpp"
#include "fnlab/train.hpp"
#include "oracles.hpp"

using namespace fnlab;

namespace {

struct Setup {
  SyntheticDistribution dist;
  Dataset<double> data;
  ModelParams<double> w0;
};

Setup small_setup(double norm, double gamma_ratio, int per_class, int m, std::uint64_t seed) {
  Setup s;
  auto spec = DistributionSpec::balanced(3, 30, norm, gamma_ratio);
  spec.seed = seed;
  s.dist = build_distribution(spec);
  Rng rng(seed + 1);
  s.data = sample_stratified(s.dist.spec, s.dist.bank, s.dist.noise, std::vector<int>(3, per_class), rng);
  Rng init(seed + 2);
  s.w0 = init_params<double>(3, m, 30, 0.01, init);
  return s;
}

}  // namespace

TEST(Train, ZeroRateKeepsInitialModelAndConstantTrace) {
  const auto s = small_setup(1.0, 10.0, 5, 4, 1);
  TrainConfig cfg;
  cfg.eta = 0.0;
  cfg.max_iters = 5;
  const auto res = train(s.w0, s.data, cfg);
  EXPECT_EQ(res.model.weights, s.w0.weights);
  ASSERT_EQ(res.trace.mean_loss.size(), 6u);
  for (double l : res.trace.mean_loss) EXPECT_EQ(l, res.trace.mean_loss.front());
  const auto mono = activation_monotonicity_report(res.trace);
  EXPECT_EQ(mono.violations, 0);
  EXPECT_GT(mono.comparisons, 0);
}

TEST(Train, ScalarRecurrenceOnOneSample) {
  // K = 2, m = 1, d = 1; feature patch a, other patch 0.
  const double a = 1.5, eta = 0.5;
  Dataset<double> ds;
  ds.num_classes = 2;
  ds.labels = {0};
  ds.feature_slots = {1};
  ds.patch1 = MatrixXd::Constant(1, 1, a);
  ds.patch2 = MatrixXd::Zero(1, 1);
  ModelParams<double> w;
  w.num_classes = 2;
  w.width = 1;
  w.dim = 1;
  w.weights.resize(2, 1);
  w.weights << 0.3, 0.2;

  TrainConfig cfg;
  cfg.eta = eta;
  cfg.max_iters = 30;
  cfg.target_loss = 1e-9;
  const auto res = train(w, ds, cfg);

  double w0 = 0.3, w1 = 0.2;
  for (int t = 0; t <= 30; ++t) {
    const double f0 = std::max(0.0, w0 * a), f1 = std::max(0.0, w1 * a);
    const double loss = std::log1p(std::exp(f1 - f0));
    EXPECT_NEAR(res.trace.mean_loss[static_cast<std::size_t>(t)], loss, 1e-10) << t;
    const double p1 = 1.0 / (1.0 + std::exp(f0 - f1));  // logit of the wrong class
    const double g0 = w0 * a > 0 ? -p1 * a : 0.0;
    const double g1 = w1 * a > 0 ? p1 * a : 0.0;
    w0 -= eta * g0;
    w1 -= eta * g1;
  }
}

TEST(Train, DefaultHighSignalConfigDecreasesStrictly) {
  auto spec = DistributionSpec::balanced(5, 1000, 3.8, 1.0);
  spec.seed = 5;
  const auto dist = build_distribution(spec);
  Rng rng(6);
  const auto ds = sample_stratified(dist.spec, dist.bank, dist.noise, std::vector<int>(5, 100), rng);
  Rng init(7);
  const auto w0 = init_params<double>(5, 100, 1000, 0.01, init);
  TrainConfig cfg;
  cfg.max_iters = 20;
  cfg.record_history = false;
  const auto res = train(w0, ds, cfg);
  ASSERT_EQ(res.trace.mean_loss.size(), 21u);
  EXPECT_LT(res.trace.mean_loss.back(), std::log(5.0));
  for (std::size_t t = 1; t < res.trace.mean_loss.size(); ++t)
    EXPECT_LT(res.trace.mean_loss[t], res.trace.mean_loss[t - 1]) << t;
}

TEST(Train, EarlyStopFiresAtFirstIterationBelowTarget) {
  const auto s = small_setup(3.0, 1.0, 10, 10, 2);
  TrainConfig cfg;
  cfg.eta = 0.5;
  cfg.max_iters = 5000;
  cfg.target_loss = 0.3;
  const auto res = train(s.w0, s.data, cfg);
  ASSERT_TRUE(res.trace.reached_target);
  const auto& L = res.trace.mean_loss;
  EXPECT_EQ(static_cast<int>(L.size()), res.trace.iterations + 1);
  EXPECT_LE(L.back(), 0.3);
  for (std::size_t t = 0; t + 1 < L.size(); ++t) EXPECT_GT(L[t], 0.3);
}

TEST(Train, CumulativeSumsAreMonotoneWithBoundedIncrements) {
  const auto s = small_setup(1.0, 50.0, 8, 6, 3);
  TrainConfig cfg;
  cfg.eta = 0.2;
  cfg.max_iters = 60;
  const auto res = train(s.w0, s.data, cfg);
  ASSERT_EQ(res.trace.history.size(), static_cast<std::size_t>(res.trace.iterations));
  std::vector<double> c(static_cast<std::size_t>(s.data.size()), 0.0);
  for (const auto& row : res.trace.history)
    for (std::size_t i = 0; i < row.size(); ++i) {
      EXPECT_GE(row[i], 0.0);
      EXPECT_LE(row[i], 1.0);
      c[i] += row[i];
    }
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(res.trace.cumulative[i], c[i], 1e-12);
  for (double k : res.trace.kappa_hat) EXPECT_GE(k, 1.0);
}

TEST(BOf, UntrainedTraceIsZero) {
  const auto s = small_setup(1.0, 1.0, 4, 3, 4);
  TrainConfig cfg;
  cfg.target_loss = 100.0;  // already met at W^(0)
  const auto res = train(s.w0, s.data, cfg);
  EXPECT_EQ(res.trace.iterations, 0);
  EXPECT_EQ(b_of_class(res.trace, 0), 0.0);
}

TEST(BOf, ConstantHalfSlackOverFourIterations) {
  Dataset<double> ds;
  ds.num_classes = 2;
  ds.labels = {1};
  ds.feature_slots = {2};
  ds.patch1 = MatrixXd::Ones(3, 1);
  ds.patch2 = MatrixXd::Ones(3, 1);
  ModelParams<double> w;
  w.num_classes = 2;
  w.width = 2;
  w.dim = 3;
  w.weights = MatrixXd::Zero(4, 3);
  TrainConfig cfg;
  cfg.eta = 0.0;
  cfg.max_iters = 4;
  const auto res = train(w, ds, cfg);
  EXPECT_DOUBLE_EQ(b_of(res.trace, {0}), 2.0);
  EXPECT_EQ(b_of(res.trace, {}), 0.0);
}

TEST(BOf, ReplayFromStoredHistory) {
  const auto s = small_setup(2.0, 20.0, 6, 5, 5);
  TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.max_iters = 25;
  const auto res = train(s.w0, s.data, cfg);
  for (int k = 0; k < 3; ++k) {
    double acc = 0.0;
    for (int i = 0; i < s.data.size(); ++i) {
      if (s.data.labels[static_cast<std::size_t>(i)] != k) continue;
      double c = 0.0;
      for (const auto& row : res.trace.history) c += row[static_cast<std::size_t>(i)];
      acc += c * c;
    }
    EXPECT_NEAR(b_of_class(res.trace, k), std::sqrt(acc), 1e-12);
  }
}

TEST(Monotonicity, SingleSnapshotHasNoComparisons) {
  const auto s = small_setup(1.0, 1.0, 4, 3, 6);
  TrainConfig cfg;
  cfg.target_loss = 100.0;
  const auto res = train(s.w0, s.data, cfg);
  ASSERT_EQ(res.trace.activations.size(), 1u);
  const auto rep = activation_monotonicity_report(res.trace);
  EXPECT_EQ(rep.comparisons, 0);
  EXPECT_EQ(rep.violations, 0);
}

TEST(Monotonicity, CountsDroppedNeuronsByHand) {
  TrainTrace tr;
  tr.num_samples = 1;
  tr.width = 3;
  tr.activations = {{0, {true, true, false}}, {1, {true, false, true}}, {2, {false, false, true}}};
  const auto rep = activation_monotonicity_report(tr);
  EXPECT_EQ(rep.comparisons, 4);
  EXPECT_EQ(rep.violations, 2);
}

TEST(Train, HugeRateDiverges) {
  const auto s = small_setup(3.0, 1.0, 5, 4, 7);
  TrainConfig cfg;
  cfg.eta = 1e308;
  cfg.max_iters = 50;
  try {
    train(s.w0, s.data, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("eta"), std::string::npos) << e.what();
  }
}

TEST(Train, InvalidConfigRejected) {
  const auto s = small_setup(1.0, 1.0, 4, 3, 8);
  TrainConfig cfg;
  cfg.max_iters = 0;
  EXPECT_THROW(train(s.w0, s.data, cfg), ConfigError);
  cfg.max_iters = 5;
  cfg.target_loss = 0.0;
  EXPECT_THROW(train(s.w0, s.data, cfg), ConfigError);
}

TEST(Train, TraceFileColumns) {
  const auto s = small_setup(1.0, 1.0, 4, 3, 9);
  TrainConfig cfg;
  cfg.max_iters = 3;
  const auto res = train(s.w0, s.data, cfg);
  const auto path = oracle::temp_path("trace.csv");
  write_trace(res.trace, path, {"tool_version=x"});
  const auto text = oracle::slurp(path);
  EXPECT_EQ(text.rfind("# tool_version=x\niter,mean_loss,kappa_hat,min_one_minus_logit,max_one_minus_logit\n", 0), 0u);
  const auto cpath = oracle::temp_path("cumulative.csv");
  write_cumulative(res.trace, cpath);
  EXPECT_EQ(oracle::slurp(cpath).rfind("sample_index,label,c_i\n", 0), 0u);
}

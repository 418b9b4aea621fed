#include <gtest/gtest.h>

#include <cmath>

#include "fnlab/net.hpp"
#include "oracles.hpp"

using namespace fnlab;

namespace {

Dataset<double> make_dataset(int K, std::vector<int> labels, const MatrixXd& p1, const MatrixXd& p2) {
  Dataset<double> ds;
  ds.num_classes = K;
  ds.labels = std::move(labels);
  ds.feature_slots.assign(ds.labels.size(), 1);
  ds.patch1 = p1;
  ds.patch2 = p2;
  return ds;
}

ModelParams<double> random_model(int K, int m, int d, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return init_params<double>(K, m, d, sigma, rng);
}

Sample<double> random_sample(int K, int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Sample<double> x;
  x.label = static_cast<int>(rng() % static_cast<std::uint64_t>(K));
  x.patch1 = VectorXd::NullaryExpr(d, [&] { return normal(rng); });
  x.patch2 = VectorXd::NullaryExpr(d, [&] { return normal(rng); });
  return x;
}

}  // namespace

TEST(Init, ZeroSigmaGivesZeroWeights) {
  const auto w = random_model(3, 4, 5, 0.0, 1);
  EXPECT_EQ(w.weights.norm(), 0.0);
}

TEST(Init, DefaultShape) {
  const auto w = random_model(5, 100, 1000, 0.01, 1);
  EXPECT_EQ(w.weights.size(), 5 * 100 * 1000);
  EXPECT_EQ(w.weights.rows(), 500);
}

TEST(Init, SampleStandardDeviation) {
  const auto w = random_model(1, 100, 1000, 0.01, 99);
  const double mean = w.weights.mean();
  const double sd = std::sqrt((w.weights.array() - mean).square().sum() / (w.weights.size() - 1));
  EXPECT_LT(std::abs(sd - 0.01) / 0.01, 0.03);
}

TEST(Forward, ZeroWeightsGiveUniformLogits) {
  const ModelParams<double> w = random_model(4, 3, 6, 0.0, 1);
  Rng rng(2);
  const auto out = forward(w, random_sample(4, 6, rng));
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(out.scores(k), 0.0);
    EXPECT_DOUBLE_EQ(out.logits(k), 0.25);
  }
}

TEST(Forward, SingleNeuronOnItsFeature) {
  ModelParams<double> w = random_model(1, 1, 3, 0.0, 1);
  VectorXd u(3);
  u << 2.0, 0.0, 0.0;
  w.weights.row(0) = u.transpose();
  Sample<double> x{0, 1, u, VectorXd::Zero(3)};
  EXPECT_DOUBLE_EQ(forward(w, x).scores(0), 4.0);
}

TEST(Forward, MatchesNaiveLoops) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto w = random_model(4, 7, 9, 0.5, 100 + t);
    const auto x = random_sample(4, 9, rng);
    const auto out = forward(w, x);
    const auto f = oracle::scores(w, x.patch1, x.patch2);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(out.scores(k), f[static_cast<std::size_t>(k)], 1e-12);
  }
}

TEST(Forward, DimensionMismatchThrows) {
  const auto w = random_model(2, 2, 5, 0.1, 1);
  Sample<double> x{0, 1, VectorXd::Zero(4), VectorXd::Zero(4)};
  EXPECT_THROW(forward(w, x), ShapeError);
}

TEST(Forward, BatchAgreesWithSingleSample) {
  Rng rng(4);
  const auto w = random_model(3, 5, 8, 0.3, 7);
  MatrixXd p1(8, 6), p2(8, 6);
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    const auto x = random_sample(3, 8, rng);
    p1.col(i) = x.patch1;
    p2.col(i) = x.patch2;
    labels.push_back(x.label);
  }
  const auto ds = make_dataset(3, labels, p1, p2);
  const auto b = forward_batch(w, ds);
  for (int i = 0; i < 6; ++i) {
    const auto out = forward(w, ds.sample(i));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(b.scores(k, i), out.scores(k), 1e-13);
    EXPECT_NEAR(b.losses(i), ce_loss(out, labels[static_cast<std::size_t>(i)]), 1e-13);
  }
}

TEST(Loss, ZeroWeightsGiveLogK) {
  const auto w = random_model(5, 2, 3, 0.0, 1);
  Rng rng(5);
  const auto x = random_sample(5, 3, rng);
  for (int y = 0; y < 5; ++y) EXPECT_NEAR(ce_loss(forward(w, x), y), std::log(5.0), 1e-12);
}

TEST(Loss, BinaryLogisticIdentity) {
  for (double t : {-20.0, -1.0, 0.0, 0.3, 5.0, 40.0}) {
    ForwardOut<double> out;
    out.scores = Eigen::Vector2d(t, 0.0);
    EXPECT_NEAR(ce_loss(out, 0), std::log1p(std::exp(-t)), 1e-12) << t;
  }
}

TEST(Loss, MatchesDirectFormula) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int t = 0; t < 50; ++t) {
    ForwardOut<double> out;
    out.scores = VectorXd::NullaryExpr(4, [&] { return u(rng); });
    const std::vector<double> f(out.scores.data(), out.scores.data() + 4);
    for (int y = 0; y < 4; ++y) {
      const double want = oracle::loss(f, y);
      EXPECT_NEAR(ce_loss(out, y), want, 1e-12 * std::max(1.0, want));
      EXPECT_GE(ce_loss(out, y), 0.0);
    }
  }
}

TEST(Loss, LargeScoresStayFinite) {
  ForwardOut<double> out;
  out.scores = Eigen::Vector3d(1000.0, 0.0, -5.0);
  EXPECT_TRUE(std::isfinite(ce_loss(out, 1)));
  EXPECT_NEAR(ce_loss(out, 1), 1000.0, 1e-9);
  EXPECT_NEAR(softmax<double>(out.scores).sum(), 1.0, 1e-12);
}

TEST(Gradient, ZeroWeightsGiveZeroGradient) {
  const auto w = random_model(3, 4, 5, 0.0, 1);
  Rng rng(7);
  MatrixXd p1 = MatrixXd::Random(5, 4), p2 = MatrixXd::Random(5, 4);
  const auto ds = make_dataset(3, {0, 1, 2, 0}, p1, p2);
  EXPECT_EQ(batch_gradient(w, ds).norm(), 0.0);
}

TEST(Gradient, HandExpandedTwoClassSingleSample) {
  ModelParams<double> w = random_model(2, 1, 2, 0.0, 1);
  w.weights << 1.0, 0.5, -0.3, 0.8;
  MatrixXd p1(2, 1), p2(2, 1);
  p1 << 2.0, 0.0;
  p2 << 0.0, 1.0;
  const auto ds = make_dataset(2, {0}, p1, p2);
  // F_0 = 2 + 0.5, F_1 = relu(-0.6) + 0.8; both patches active for w_0, only x2 for w_1.
  const double l1 = 1.0 / (1.0 + std::exp(2.5 - 0.8));
  const MatrixXd g = batch_gradient(w, ds);
  EXPECT_NEAR(g(0, 0), -l1 * 2.0, 1e-15);
  EXPECT_NEAR(g(0, 1), -l1 * 1.0, 1e-15);
  EXPECT_NEAR(g(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(g(1, 1), l1 * 1.0, 1e-15);
}

TEST(Gradient, MatchesFiniteDifferencesAwayFromKinks) {
  Rng rng(8);
  int checked = 0;
  for (int t = 0; t < 40 && checked < 5; ++t) {
    const auto w = random_model(3, 4, 6, 0.7, 200 + t);
    MatrixXd p1(6, 3), p2(6, 3);
    std::vector<int> labels;
    for (int i = 0; i < 3; ++i) {
      const auto x = random_sample(3, 6, rng);
      p1.col(i) = x.patch1;
      p2.col(i) = x.patch2;
      labels.push_back(x.label);
    }
    const auto ds = make_dataset(3, labels, p1, p2);
    const auto fwd = forward_batch(w, ds);
    if (fwd.pre1.cwiseAbs().minCoeff() <= 1e-3 || fwd.pre2.cwiseAbs().minCoeff() <= 1e-3) continue;
    const MatrixXd g = batch_gradient(w, ds, fwd);
    const MatrixXd fd = oracle::fd_gradient(w, ds, 1e-5);
    const double scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    EXPECT_LT((g - fd).cwiseAbs().maxCoeff() / scale, 1e-4);
    ++checked;
  }
  EXPECT_EQ(checked, 5);
}

TEST(GdStep, ZeroGradientLeavesWeights) {
  const auto w = random_model(2, 3, 4, 0.1, 1);
  EXPECT_EQ(gd_step(w, MatrixXd(MatrixXd::Zero(6, 4)), 0.05).weights, w.weights);
}

TEST(GdStep, UnitStepOnOwnWeightsZeroes) {
  const auto w = random_model(2, 3, 4, 0.1, 1);
  EXPECT_EQ(gd_step(w, w.weights, 1.0).weights.norm(), 0.0);
}

TEST(GdStep, TwoHalfStepsEqualOneStep) {
  const auto w = random_model(2, 3, 4, 0.1, 1);
  const MatrixXd g = MatrixXd::Random(6, 4);
  const auto one = gd_step(w, g, 0.2);
  const auto two = gd_step(gd_step(w, g, 0.1), g, 0.1);
  EXPECT_LT((one.weights - two.weights).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GdStep, NonPositiveRateRejected) {
  const auto w = random_model(2, 3, 4, 0.1, 1);
  EXPECT_THROW(gd_step(w, w.weights, 0.0), ConfigError);
  EXPECT_THROW(gd_step(w, w.weights, -1.0), ConfigError);
}

TEST(Invariants, PatchSwapIsBitExact) {
  Rng rng(9);
  const auto w = random_model(5, 10, 12, 0.4, 3);
  for (int t = 0; t < 20; ++t) {
    auto x = random_sample(5, 12, rng);
    const auto a = forward(w, x);
    std::swap(x.patch1, x.patch2);
    const auto b = forward(w, x);
    EXPECT_EQ(a.scores, b.scores);
    EXPECT_EQ(a.logits, b.logits);
    EXPECT_EQ(ce_loss(a, x.label), ce_loss(b, x.label));
  }
}

TEST(Invariants, PositiveHomogeneity) {
  Rng rng(10);
  const auto w = random_model(3, 6, 8, 0.4, 4);
  const auto x = random_sample(3, 8, rng);
  const auto base = forward(w, x);
  for (double c : {0.5, 2.0, 10.0}) {
    auto cw = w;
    cw.weights *= c;
    const auto out = forward(cw, x);
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(out.scores(k) - c * base.scores(k)), 1e-12 * std::abs(c * base.scores(k)));
  }
}

TEST(Invariants, SoftmaxNormalization) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto w = random_model(7, 4, 5, 2.0, 300 + t);
    EXPECT_LE(std::abs(forward(w, random_sample(7, 5, rng)).logits.sum() - 1.0), 1e-12);
  }
}

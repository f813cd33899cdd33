#include "featforge/oracles.hpp"
#include "featforge/sgc.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace featforge;
using namespace testing_support;

namespace {

FeatureMatrix random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureMatrix x(n, d);
  for (auto& v : x.values().reshaped()) v = normal(rng);
  return x;
}

FeatureMatrix column_features(const std::vector<double>& v) {
  FeatureMatrix x(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) x(i, 0) = v[i];
  return x;
}

LinearClassifier fixed_model(Matrix w, ClassifierMode mode) {
  LinearClassifier m;
  m.bias = Vector::Zero(w.cols());
  m.weights = std::move(w);
  m.mode = mode;
  return m;
}

}  // namespace

TEST(Propagate, ZeroHopsIsIdentity) {
  Graph g = oracle::erdos_renyi(10, 0.3, 1);
  FeatureMatrix x = random_features(10, 3, 1);
  EXPECT_EQ(propagate(g, x, 0), x);
}

TEST(Propagate, SingleNodeUnchanged) {
  FeatureMatrix x = random_features(1, 4, 2);
  EXPECT_LE((propagate(make_graph(1, {}), x, 5).values() - x.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagate, EdgeAveragesBothEnds) {
  FeatureMatrix x(2, 2);
  x(0, 0) = 1;
  x(1, 1) = 1;
  auto y = propagate(path_graph(2), x, 1);
  EXPECT_LE((y.values().array() - 0.5).abs().maxCoeff(), 1e-15);
}

TEST(Propagate, MatchesDenseOracle) {
  Graph g = oracle::erdos_renyi(12, 0.3, 3);
  FeatureMatrix x = random_features(12, 4, 3);
  Eigen::MatrixXd expect = oracle::sgc_propagate(g, x.values(), 3);
  EXPECT_LE((propagate(g, x, 3).values() - expect).cwiseAbs().maxCoeff(), 1e-10);
  std::ostringstream log;
  EXPECT_TRUE(oracle::run_propagation_suite(20, 4, log)) << log.str();
}

TEST(Propagate, RowMismatchThrows) {
  EXPECT_THROW(propagate(path_graph(3), random_features(2, 1, 0), 1), Error);
}

TEST(Propagate, IsLinear) {
  Graph g = oracle::erdos_renyi(20, 0.2, 5);
  FeatureMatrix x = random_features(20, 3, 6), y = random_features(20, 3, 7);
  const double a = 1.7, b = -0.4;
  FeatureMatrix mix(FeatureMatrix::Matrix(a * x.values() + b * y.values()));
  Eigen::MatrixXd lhs = propagate(g, mix, 2).values();
  Eigen::MatrixXd rhs = a * propagate(g, x, 2).values() + b * propagate(g, y, 2).values();
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, ColumnDefinitions) {
  auto z = standardize(column_features({1, 2, 3}));
  EXPECT_NEAR(z(0, 0), -std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(z(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(z(2, 0), std::sqrt(1.5), 1e-12);
  auto c = standardize(column_features({4, 4, 4}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(c(i, 0), 0.0);
}

TEST(Standardize, RandomMatrixHasUnitColumns) {
  FeatureMatrix x = random_features(50, 6, 8);
  x.values() = (x.values() * 3.0).array() + 7.0;
  auto z = standardize(x).values();
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    double mean = z.col(c).mean();
    double var = (z.col(c).array() - mean).square().mean();
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_NEAR(var, 1.0, 1e-10);
  }
}

TEST(Classifier, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_LE(gradcheck::softmax(seed), 1e-4) << "softmax seed " << seed;
    EXPECT_LE(gradcheck::logistic(seed), 1e-4) << "logistic seed " << seed;
  }
}

TEST(Classifier, SeparableOneDimensionalData) {
  std::vector<double> xs;
  std::vector<ClassId> ys;
  for (int i = 0; i < 20; ++i) {
    xs.insert(xs.end(), {-1.0, 1.0});
    ys.insert(ys.end(), {0, 1});
  }
  FeatureMatrix x = column_features(xs);
  LabelSet y = LabelSet::single(2, ys);
  for (auto mode : {ClassifierMode::softmax, ClassifierMode::one_vs_rest}) {
    SgcConfig cfg;
    cfg.classifier_mode = mode;
    auto model = fit_classifier(x, y, cfg);
    auto pred = predict(model, x, mode == ClassifierMode::one_vs_rest
                                      ? std::optional<std::span<const std::size_t>>(std::vector<std::size_t>(40, 1))
                                      : std::nullopt);
    for (std::size_t i = 0; i < ys.size(); ++i) EXPECT_EQ(pred.label(i), ys[i]);
  }
}

TEST(Classifier, ZeroFeaturesPredictMajority) {
  FeatureMatrix x(10, 2);
  std::vector<ClassId> ys{0, 1, 1, 2, 1, 1, 0, 1, 2, 1};
  auto model = fit_classifier(x, LabelSet::single(3, ys), SgcConfig{});
  auto pred = predict(model, FeatureMatrix(3, 2));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(pred.label(i), 1);
  // Bias-only optimum: softmax(b) equals the class frequencies.
  Vector p = model.bias.array().exp();
  p /= p.sum();
  EXPECT_NEAR(p[0], 0.2, 2e-2);
  EXPECT_NEAR(p[1], 0.6, 2e-2);
  EXPECT_NEAR(p[2], 0.2, 2e-2);
}

TEST(Classifier, SingleClassIsRejected) {
  FeatureMatrix x = random_features(5, 2, 1);
  std::vector<ClassId> ys(5, 1);
  EXPECT_THROW(fit_classifier(x, LabelSet::single(3, ys), SgcConfig{}), Error);
}

TEST(Classifier, LossTraceIsMonotone) {
  FeatureMatrix x = random_features(60, 4, 9);
  std::vector<ClassId> ys(60);
  for (int i = 0; i < 60; ++i) ys[i] = (x(i, 0) + 0.5 * x(i, 1) > 0) + (x(i, 2) > 1.0);
  for (auto mode : {ClassifierMode::softmax, ClassifierMode::one_vs_rest}) {
    SgcConfig cfg;
    cfg.learning_rate = 50.0;  // force rejected steps
    cfg.classifier_mode = mode;
    TrainingTrace trace;
    fit_classifier(x, LabelSet::single(3, ys), cfg, &trace);
    EXPECT_GT(trace.rejected_steps, 0u);
    ASSERT_GE(trace.losses.size(), 2u);
    // One-vs-rest concatenates per-class traces, so a new trace may start
    // above the previous one's final loss at the C - 1 class boundaries.
    std::size_t increases = 0;
    for (std::size_t i = 1; i < trace.losses.size(); ++i) increases += trace.losses[i] > trace.losses[i - 1] + 1e-12;
    EXPECT_LE(increases, mode == ClassifierMode::softmax ? 0u : 2u);
  }
}

TEST(Predict, ArgmaxAndTies) {
  Matrix w(3, 3);
  w.setIdentity();
  auto model = fixed_model(w, ClassifierMode::softmax);
  FeatureMatrix x(2, 3);
  x(0, 0) = 0.1;
  x(0, 1) = 0.9;
  x(0, 2) = 0.3;
  x(1, 0) = 0.5;
  x(1, 1) = 0.5;
  auto pred = predict(model, x);
  EXPECT_EQ(pred.label(0), 1);
  EXPECT_EQ(pred.label(1), 0);
}

TEST(Predict, TopKOneVsRest) {
  Matrix w = Matrix::Identity(3, 3);
  auto model = fixed_model(w, ClassifierMode::one_vs_rest);
  FeatureMatrix x(1, 3);
  x(0, 0) = 0.9;
  x(0, 1) = 0.1;
  x(0, 2) = 0.8;
  std::vector<std::size_t> k{2};
  auto pred = predict(model, x, std::span<const std::size_t>(k));
  EXPECT_EQ(std::vector<ClassId>(pred.classes(0).begin(), pred.classes(0).end()), (std::vector<ClassId>{0, 2}));
  std::vector<std::size_t> too_many{4};
  EXPECT_THROW(predict(model, x, std::span<const std::size_t>(too_many)), Error);
}

TEST(Predict, ShiftInvariance) {
  FeatureMatrix x = random_features(20, 3, 11);
  Matrix w = random_features(3, 4, 12).values();
  auto model = fixed_model(w, ClassifierMode::softmax);
  auto base = predict(model, x);
  model.bias.setConstant(3.25);
  EXPECT_EQ(predict(model, x), base);
}

TEST(Classifier, SaveLoadRoundTrip) {
  TempDir dir;
  FeatureMatrix x = random_features(30, 3, 13);
  std::vector<ClassId> ys(30);
  for (int i = 0; i < 30; ++i) ys[i] = x(i, 0) > 0;
  auto model = fit_classifier(x, LabelSet::single(2, ys), SgcConfig{});
  save_classifier(dir / "m", model);
  auto back = load_classifier(dir / "m");
  EXPECT_EQ(back.mode, model.mode);
  EXPECT_EQ(back.weights, model.weights);
  EXPECT_EQ(back.bias, model.bias);
}

TEST(Classifier, DeterministicFit) {
  FeatureMatrix x = random_features(40, 5, 14);
  std::vector<ClassId> ys(40);
  for (int i = 0; i < 40; ++i) ys[i] = i % 3;
  auto a = fit_classifier(x, LabelSet::single(3, ys), SgcConfig{});
  auto b = fit_classifier(x, LabelSet::single(3, ys), SgcConfig{});
  EXPECT_EQ(a.weights, b.weights);
}

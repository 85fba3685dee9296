#include "scengen/flow.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scengen/errors.hpp"
#include "scengen/rng.hpp"
#include "scengen/trajectory.hpp"

using scengen::EventSample;
using scengen::FlowLayer;
using scengen::FlowModel;
using scengen::ParseError;
using scengen::RngStream;
using scengen::train_flow;
using scengen::TrainReport;
using scengen::TrainSettings;
using scengen::ValidationError;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

std::vector<EventSample> gaussian_samples(int n, int dim, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<EventSample> samples(n);
  for (auto& s : samples) {
    s.features.resize(dim);
    for (double& f : s.features) f = rng.normal();
  }
  return samples;
}

// All-zero conditioner weights make every flow the identity map.
FlowModel identity_model(int dim, int hidden, int n_flows) {
  FlowModel m;
  m.ls_id = "unit";
  m.n_flows = n_flows;
  m.hidden = hidden;
  m.feature_mean = Eigen::VectorXd::Zero(dim);
  m.feature_std = Eigen::VectorXd::Ones(dim);
  for (int f = 0; f < n_flows; ++f) {
    FlowLayer layer;
    layer.w1 = Eigen::MatrixXd::Zero(hidden, dim);
    layer.w2 = Eigen::MatrixXd::Zero(hidden, hidden);
    layer.w3 = Eigen::MatrixXd::Zero(2 * dim, hidden);
    layer.b1 = Eigen::VectorXd::Zero(hidden);
    layer.b2 = Eigen::VectorXd::Zero(hidden);
    layer.b3 = Eigen::VectorXd::Zero(2 * dim);
    m.layers.push_back(layer);
  }
  m.train_loglik_sorted = {-3.0, -2.0, -1.0};
  return m;
}

TrainSettings quick_settings() {
  TrainSettings s;
  s.epochs = 8;
  s.hidden = 16;
  s.n_flows = 3;
  return s;
}

}  // namespace

TEST(FlowIdentity, ZeroConditionerGivesBaseNormalDensity) {
  const FlowModel m = identity_model(2, 8, 1);
  const std::vector<double> origin = {0.0, 0.0};
  EXPECT_NEAR(m.log_likelihood(origin), -kLog2Pi, 1e-12);
  const std::vector<double> x = {1.0, -2.0};
  EXPECT_NEAR(m.log_likelihood(x), -0.5 * 5.0 - kLog2Pi, 1e-12);
}

TEST(FlowIdentity, StandardizationShiftsDensity) {
  FlowModel m = identity_model(2, 8, 1);
  m.feature_mean << 10.0, -4.0;
  m.feature_std << 2.0, 0.5;
  // Data-space density picks up the -sum(log std) change of variables.
  const std::vector<double> at_mean = {10.0, -4.0};
  EXPECT_NEAR(m.log_likelihood(at_mean), -kLog2Pi - std::log(2.0) - std::log(0.5), 1e-12);
}

TEST(FlowIdentity, StackedIdentityFlowsStayIdentity) {
  const FlowModel m = identity_model(3, 8, 5);
  const std::vector<double> x = {0.3, -1.1, 2.0};
  EXPECT_NEAR(m.log_likelihood(x),
              -0.5 * (0.09 + 1.21 + 4.0) - 1.5 * kLog2Pi, 1e-12);
}

TEST(FlowTrain, RejectsTooFewSamples) {
  const auto samples = gaussian_samples(150, 2, 1);
  EXPECT_THROW(train_flow(samples, quick_settings(), 1), ValidationError);
}

TEST(FlowTrain, RejectsInconsistentDimensions) {
  auto samples = gaussian_samples(250, 2, 1);
  samples[3].features.push_back(0.0);
  EXPECT_THROW(train_flow(samples, quick_settings(), 1), ValidationError);
}

TEST(FlowTrain, DeterministicPerSeed) {
  const auto samples = gaussian_samples(400, 2, 2);
  const FlowModel a = train_flow(samples, quick_settings(), 11);
  const FlowModel b = train_flow(samples, quick_settings(), 11);
  EXPECT_EQ(a.to_json(), b.to_json());
  const FlowModel c = train_flow(samples, quick_settings(), 12);
  EXPECT_NE(a.to_json(), c.to_json());
}

TEST(FlowTrain, TrainLoglikImprovesMonotonically) {
  const auto samples = gaussian_samples(600, 2, 3);
  TrainSettings settings = quick_settings();
  settings.epochs = 20;
  TrainReport report;
  train_flow(samples, settings, 5, &report);
  ASSERT_GE(report.train_loglik.size(), 2u);
  for (std::size_t i = 1; i < report.train_loglik.size(); ++i) {
    ASSERT_GE(report.train_loglik[i], report.train_loglik[i - 1] - 0.05) << "epoch " << i;
  }
}

TEST(FlowTrain, SortedLoglikSupportIsNondecreasing) {
  const auto samples = gaussian_samples(400, 3, 4);
  const FlowModel m = train_flow(samples, quick_settings(), 6);
  ASSERT_EQ(m.train_loglik_sorted.size(), samples.size());
  for (std::size_t i = 1; i < m.train_loglik_sorted.size(); ++i) {
    ASSERT_LE(m.train_loglik_sorted[i - 1], m.train_loglik_sorted[i]);
  }
}

TEST(FlowRoundTrip, InverseThenForwardRecoversInput) {
  const auto samples = gaussian_samples(400, 3, 7);
  const FlowModel m = train_flow(samples, quick_settings(), 8);
  RngStream rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-3.0, 3.0);
    const Eigen::VectorXd back = m.forward(m.inverse(x));
    worst = std::max(worst, (back - x).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(FlowRoundTrip, LogDetMatchesNumericalJacobian) {
  const auto samples = gaussian_samples(500, 2, 9);
  const FlowModel m = train_flow(samples, quick_settings(), 10);
  RngStream rng(123);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(2);
    x << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
    double log_det = 0.0;
    m.inverse(x, &log_det);
    Eigen::Matrix2d jac;
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd hi = x, lo = x;
      hi(j) += h;
      lo(j) -= h;
      const Eigen::VectorXd du = (m.inverse(hi) - m.inverse(lo)) / (2.0 * h);
      jac.col(j) = du;
    }
    const double numeric = std::log(std::abs(jac.determinant()));
    ASSERT_NEAR(log_det, numeric, 1e-4) << "trial " << trial;
  }
}

TEST(FlowDensity, AlwaysFinite) {
  const auto samples = gaussian_samples(300, 2, 13);
  const FlowModel m = train_flow(samples, quick_settings(), 14);
  RngStream rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::vector<double> x = {rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)};
    ASSERT_TRUE(std::isfinite(m.log_likelihood(x)));
  }
}

TEST(FlowDensity, DimensionMismatchThrows) {
  const FlowModel m = identity_model(2, 8, 1);
  const std::vector<double> bad = {1.0, 2.0, 3.0};
  EXPECT_THROW(m.log_likelihood(bad), ValidationError);
}

TEST(NatNorm, EmpiricalCdfEdges) {
  FlowModel m = identity_model(2, 8, 1);
  m.train_loglik_sorted = {-5.0, -4.0, -3.0, -2.0, -1.0};
  EXPECT_DOUBLE_EQ(m.nat_norm(-10.0), 0.0);
  EXPECT_DOUBLE_EQ(m.nat_norm(0.0), 1.0);
  // Tie at the median: midpoint of 2 strictly-below and 3 at-or-below.
  EXPECT_DOUBLE_EQ(m.nat_norm(-3.0), 0.5);
  EXPECT_DOUBLE_EQ(m.nat_norm(-3.5), 0.4);
}

TEST(NatNorm, MonotoneInLoglik) {
  const auto samples = gaussian_samples(300, 2, 17);
  const FlowModel m = train_flow(samples, quick_settings(), 18);
  double prev = -1.0;
  for (double ll = -50.0; ll <= 10.0; ll += 0.5) {
    const double r = m.nat_norm(ll);
    ASSERT_GE(r, prev);
    ASSERT_GE(r, 0.0);
    ASSERT_LE(r, 1.0);
    prev = r;
  }
}

TEST(FlowSample, DeterministicPerStream) {
  const auto samples = gaussian_samples(300, 2, 19);
  const FlowModel m = train_flow(samples, quick_settings(), 20);
  RngStream a(5), b(5);
  EXPECT_EQ(m.sample(a), m.sample(b));
}

TEST(FlowSerialize, RoundTripPreservesModel) {
  const auto samples = gaussian_samples(300, 2, 21);
  const FlowModel m = train_flow(samples, quick_settings(), 22);
  const FlowModel back = FlowModel::from_json(m.to_json());
  EXPECT_EQ(m.to_json(), back.to_json());
  const std::vector<double> x = {0.4, -0.7};
  EXPECT_DOUBLE_EQ(m.log_likelihood(x), back.log_likelihood(x));
}

TEST(FlowSerialize, SaveLoadThroughDisk) {
  const auto samples = gaussian_samples(300, 2, 23);
  const FlowModel m = train_flow(samples, quick_settings(), 24);
  const std::string path = testing::TempDir() + "scengen_flow_test.flow";
  m.save(path);
  const FlowModel back = FlowModel::load(path);
  EXPECT_EQ(m.to_json(), back.to_json());
  std::remove(path.c_str());
}

TEST(FlowSerialize, MissingVersionRejected) {
  EXPECT_THROW(FlowModel::from_json("{}"), ParseError);
  EXPECT_THROW(FlowModel::from_json("not json at all"), ParseError);
}

TEST(FlowSerialize, WrongVersionRejected) {
  const auto samples = gaussian_samples(300, 2, 25);
  const FlowModel m = train_flow(samples, quick_settings(), 26);
  std::string text = m.to_json();
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "\"version\": 2");
  EXPECT_THROW(FlowModel::from_json(text), ParseError);
}

TEST(FlowValidate, RejectsNonPositiveStd) {
  FlowModel m = identity_model(2, 8, 1);
  m.feature_std(1) = 0.0;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(FlowValidate, RejectsShapeMismatch) {
  FlowModel m = identity_model(2, 8, 2);
  m.layers[1].w3 = Eigen::MatrixXd::Zero(3, 8);  // must be 2*dim x hidden
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(FlowGaussian, RecoversStandardNormalEntropy) {
  // Mean log-likelihood of a fitted 2-D standard normal approaches the
  // negative differential entropy -(D/2) ln(2 pi e) = -2.8379.
  const auto train = gaussian_samples(10000, 2, 31);
  TrainSettings settings;  // full defaults
  const FlowModel m = train_flow(train, settings, 32);
  const auto held_out = gaussian_samples(2000, 2, 33);
  double sum = 0.0;
  for (const auto& s : held_out) sum += m.log_likelihood(s.features);
  const double mean = sum / held_out.size();
  const double target = -std::log(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(mean, target, 0.1);
}

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scengen/rng.hpp"
#include "scengen/scenario.hpp"
#include "scengen/trajectory.hpp"

namespace scengen {

inline constexpr double kAlphaClamp = 7.0;  // log-scale bound keeps every density finite

// MADE-style autoregressive masks shared by all flows of one model.
// Output rows [0, dim) carry the shifts, rows [dim, 2*dim) the log-scales;
// output i may only read inputs strictly before i.
struct FlowMasks {
  Eigen::MatrixXd m1;  // hidden x dim
  Eigen::MatrixXd m2;  // hidden x hidden
  Eigen::MatrixXd m3;  // 2*dim x hidden

  static FlowMasks build(int dim, int hidden);
};

// One affine flow: a two-hidden-layer tanh conditioner producing (mu, alpha).
struct FlowLayer {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
};

struct TrainSettings {
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-3;
  int hidden = 64;
  int n_flows = 5;
  double val_fraction = 0.1;
  int patience = 10;  // early stop after this many epochs without val improvement
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<double> train_loglik;  // mean train log-likelihood after each epoch
  double val_loglik = 0.0;           // best validation mean log-likelihood
  int sample_count = 0;
};

class FlowModel {
 public:
  std::string ls_id;
  int n_flows = 0;
  int hidden = 0;
  std::vector<FlowLayer> layers;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;
  std::vector<double> train_loglik_sorted;  // nondecreasing; empirical CDF support

  int dim() const { return static_cast<int>(feature_mean.size()); }
  const FlowMasks& masks() const;

  // Conditioner outputs for one flow given its input (standardized space).
  void conditioner(int layer, const Eigen::VectorXd& x, Eigen::VectorXd* mu,
                   Eigen::VectorXd* alpha) const;

  // Data (standardized) -> base noise; accumulates the log-determinant of the
  // inverse map (sum of -alpha over flows) into *log_det when given.
  Eigen::VectorXd inverse(const Eigen::VectorXd& x_std, double* log_det = nullptr) const;
  // Base noise -> data (standardized); built dimension by dimension.
  Eigen::VectorXd forward(const Eigen::VectorXd& z) const;

  // Data-space log-density of a parameter vector.
  double log_likelihood(std::span<const double> values) const;
  double log_likelihood(const ConcreteScenario& cs) const;

  // Empirical-CDF rank of loglik against the training log-likelihoods,
  // midpoint convention for ties.
  double nat_norm(double loglik) const;

  // Draw one data-space parameter vector.
  std::vector<double> sample(RngStream& rng) const;

  void validate() const;

  std::string to_json() const;
  static FlowModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static FlowModel load(const std::string& path);

 private:
  mutable FlowMasks masks_;
  mutable bool masks_ready_ = false;
};

// Maximum-likelihood training of a flow stack on event samples. All samples
// must share one feature dimension; at least 200 are required. Deterministic
// given the seed.
FlowModel train_flow(const std::vector<EventSample>& samples, const TrainSettings& hyper,
                     std::uint64_t seed, TrainReport* report = nullptr);

}  // namespace scengen

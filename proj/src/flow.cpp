#include "scengen/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scengen/errors.hpp"

namespace scengen {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)
constexpr double kStdFloor = 1e-6;

Eigen::MatrixXd reverse_rows(const Eigen::MatrixXd& m) {
  return m.colwise().reverse().eval();
}

}  // namespace

FlowMasks FlowMasks::build(int dim, int hidden) {
  FlowMasks masks;
  masks.m1 = Eigen::MatrixXd::Zero(hidden, dim);
  masks.m2 = Eigen::MatrixXd::Zero(hidden, hidden);
  masks.m3 = Eigen::MatrixXd::Zero(2 * dim, hidden);
  // Hidden degrees cycle in [1, dim-1]; inputs carry degree i+1; outputs are
  // strict so coordinate i reads only coordinates before i.
  auto hidden_degree = [&](int k) { return k % std::max(1, dim - 1) + 1; };
  for (int k = 0; k < hidden; ++k) {
    for (int i = 0; i < dim; ++i) {
      masks.m1(k, i) = hidden_degree(k) >= i + 1 ? 1.0 : 0.0;
    }
  }
  for (int k2 = 0; k2 < hidden; ++k2) {
    for (int k1 = 0; k1 < hidden; ++k1) {
      masks.m2(k2, k1) = hidden_degree(k2) >= hidden_degree(k1) ? 1.0 : 0.0;
    }
  }
  for (int r = 0; r < 2 * dim; ++r) {
    const int coord = r % dim;
    for (int k = 0; k < hidden; ++k) {
      masks.m3(r, k) = coord + 1 > hidden_degree(k) ? 1.0 : 0.0;
    }
  }
  return masks;
}

namespace {

// Activations of one flow's conditioner plus its inverse-map output, kept for
// backpropagation.
struct LayerCache {
  Eigen::MatrixXd x_in, h1, h2, mu, alpha_raw, alpha, u;
};

void flow_inverse_batch(const FlowLayer& layer, const FlowMasks& masks,
                        const Eigen::MatrixXd& x, LayerCache* cache) {
  const int dim = static_cast<int>(x.rows());
  cache->x_in = x;
  Eigen::MatrixXd a1 = layer.w1.cwiseProduct(masks.m1) * x;
  a1.colwise() += layer.b1;
  cache->h1 = a1.array().tanh().matrix();
  Eigen::MatrixXd a2 = layer.w2.cwiseProduct(masks.m2) * cache->h1;
  a2.colwise() += layer.b2;
  cache->h2 = a2.array().tanh().matrix();
  Eigen::MatrixXd out = layer.w3.cwiseProduct(masks.m3) * cache->h2;
  out.colwise() += layer.b3;
  cache->mu = out.topRows(dim);
  cache->alpha_raw = out.bottomRows(dim);
  cache->alpha = cache->alpha_raw.cwiseMax(-kAlphaClamp).cwiseMin(kAlphaClamp);
  cache->u = (x - cache->mu).cwiseProduct((-cache->alpha).array().exp().matrix());
}

struct LayerGrad {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
};

// Gradient of the mean negative log-likelihood through one flow. g_u is the
// gradient w.r.t. this flow's output; inv_batch feeds the mean-of-sum alpha
// term. Returns the gradient w.r.t. the flow's input via *g_x.
void flow_backward(const FlowLayer& layer, const FlowMasks& masks, const LayerCache& cache,
                   const Eigen::MatrixXd& g_u, double inv_batch, LayerGrad* grad,
                   Eigen::MatrixXd* g_x) {
  const int dim = static_cast<int>(cache.x_in.rows());
  const Eigen::MatrixXd scale = (-cache.alpha).array().exp().matrix();
  Eigen::MatrixXd g_alpha = -g_u.cwiseProduct(cache.u);
  g_alpha.array() += inv_batch;
  const Eigen::MatrixXd pass =
      (cache.alpha_raw.array().abs() < kAlphaClamp).cast<double>().matrix();
  g_alpha = g_alpha.cwiseProduct(pass);
  const Eigen::MatrixXd g_mu = -g_u.cwiseProduct(scale);

  Eigen::MatrixXd g_out(2 * dim, g_u.cols());
  g_out.topRows(dim) = g_mu;
  g_out.bottomRows(dim) = g_alpha;

  grad->w3 = (g_out * cache.h2.transpose()).cwiseProduct(masks.m3);
  grad->b3 = g_out.rowwise().sum();
  const Eigen::MatrixXd g_h2 = layer.w3.cwiseProduct(masks.m3).transpose() * g_out;
  const Eigen::MatrixXd g_a2 = g_h2.cwiseProduct((1.0 - cache.h2.array().square()).matrix());
  grad->w2 = (g_a2 * cache.h1.transpose()).cwiseProduct(masks.m2);
  grad->b2 = g_a2.rowwise().sum();
  const Eigen::MatrixXd g_h1 = layer.w2.cwiseProduct(masks.m2).transpose() * g_a2;
  const Eigen::MatrixXd g_a1 = g_h1.cwiseProduct((1.0 - cache.h1.array().square()).matrix());
  grad->w1 = (g_a1 * cache.x_in.transpose()).cwiseProduct(masks.m1);
  grad->b1 = g_a1.rowwise().sum();
  *g_x = g_u.cwiseProduct(scale) + layer.w1.cwiseProduct(masks.m1).transpose() * g_a1;
}

// Mean log-likelihood of standardized columns under the flow stack, without
// the data-space standardization correction.
double mean_loglik_std(const std::vector<FlowLayer>& layers, const FlowMasks& masks,
                       const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.cols());
  const int dim = static_cast<int>(x.rows());
  Eigen::MatrixXd cur = x;
  Eigen::RowVectorXd log_det = Eigen::RowVectorXd::Zero(n);
  LayerCache cache;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    flow_inverse_batch(layers[l], masks, cur, &cache);
    log_det -= cache.alpha.colwise().sum();
    cur = l + 1 < layers.size() ? reverse_rows(cache.u) : cache.u;
  }
  const Eigen::RowVectorXd sq = cur.colwise().squaredNorm();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += -0.5 * sq(i) - 0.5 * dim * kLog2Pi + log_det(i);
  }
  return total / n;
}

template <typename T>
void adam_update(T* w, T* m, T* v, const T& g, double lr, double bc1, double bc2) {
  *m = 0.9 * *m + 0.1 * g;
  *v = 0.999 * *v + 0.001 * g.cwiseProduct(g);
  w->array() -= lr * (m->array() / bc1) / ((v->array() / bc2).sqrt() + 1e-8);
}

}  // namespace

const FlowMasks& FlowModel::masks() const {
  if (!masks_ready_) {
    masks_ = FlowMasks::build(dim(), hidden);
    masks_ready_ = true;
  }
  return masks_;
}

void FlowModel::conditioner(int layer, const Eigen::VectorXd& x, Eigen::VectorXd* mu,
                            Eigen::VectorXd* alpha) const {
  if (layer < 0 || layer >= n_flows) throw ValidationError("flow layer index out of range");
  LayerCache cache;
  flow_inverse_batch(layers[layer], masks(), x, &cache);
  *mu = cache.mu.col(0);
  *alpha = cache.alpha.col(0);
}

Eigen::VectorXd FlowModel::inverse(const Eigen::VectorXd& x_std, double* log_det) const {
  if (x_std.size() != dim()) throw ValidationError("flow input dimension mismatch");
  Eigen::VectorXd cur = x_std;
  double ld = 0.0;
  Eigen::VectorXd mu, alpha;
  for (int l = 0; l < n_flows; ++l) {
    conditioner(l, cur, &mu, &alpha);
    cur = ((cur - mu).array() * (-alpha.array()).exp()).matrix();
    ld -= alpha.sum();
    if (l + 1 < n_flows) cur = cur.reverse().eval();
  }
  if (log_det) *log_det = ld;
  return cur;
}

Eigen::VectorXd FlowModel::forward(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) throw ValidationError("flow input dimension mismatch");
  const int d = dim();
  Eigen::VectorXd cur = z;
  Eigen::VectorXd mu, alpha;
  for (int l = n_flows - 1; l >= 0; --l) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
      conditioner(l, x, &mu, &alpha);
      x(i) = mu(i) + std::exp(alpha(i)) * cur(i);
    }
    cur = x;
    if (l > 0) cur = cur.reverse().eval();
  }
  return cur;
}

double FlowModel::log_likelihood(std::span<const double> values) const {
  if (static_cast<int>(values.size()) != dim()) {
    throw ValidationError("log_likelihood dimension mismatch: model expects " +
                          std::to_string(dim()) + " values, got " +
                          std::to_string(values.size()));
  }
  const int d = dim();
  Eigen::VectorXd x_std(d);
  double log_std_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    x_std(i) = (values[i] - feature_mean(i)) / feature_std(i);
    log_std_sum += std::log(feature_std(i));
  }
  double log_det = 0.0;
  const Eigen::VectorXd u = inverse(x_std, &log_det);
  return -0.5 * u.squaredNorm() - 0.5 * d * kLog2Pi + log_det - log_std_sum;
}

double FlowModel::log_likelihood(const ConcreteScenario& cs) const {
  return log_likelihood(std::span<const double>(cs.values));
}

double FlowModel::nat_norm(double loglik) const {
  if (train_loglik_sorted.empty()) {
    throw ValidationError("flow model has no stored training log-likelihoods");
  }
  const auto lo = std::lower_bound(train_loglik_sorted.begin(), train_loglik_sorted.end(), loglik);
  const auto hi = std::upper_bound(train_loglik_sorted.begin(), train_loglik_sorted.end(), loglik);
  const double below = static_cast<double>(lo - train_loglik_sorted.begin());
  const double not_above = static_cast<double>(hi - train_loglik_sorted.begin());
  return 0.5 * (below + not_above) / static_cast<double>(train_loglik_sorted.size());
}

std::vector<double> FlowModel::sample(RngStream& rng) const {
  const int d = dim();
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z(i) = rng.normal();
  const Eigen::VectorXd x_std = forward(z);
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out[i] = feature_mean(i) + feature_std(i) * x_std(i);
  return out;
}

void FlowModel::validate() const {
  const int d = dim();
  if (d < 1) throw ValidationError("flow model dimension must be >= 1");
  if (hidden < 1) throw ValidationError("flow model hidden width must be >= 1");
  if (n_flows < 1 || static_cast<int>(layers.size()) != n_flows) {
    throw ValidationError("flow model layer count does not match n_flows");
  }
  if (feature_std.size() != d) throw ValidationError("feature_std length mismatch");
  for (int i = 0; i < d; ++i) {
    if (!(feature_std(i) > 0.0)) throw ValidationError("feature_std components must be > 0");
  }
  for (const FlowLayer& l : layers) {
    if (l.w1.rows() != hidden || l.w1.cols() != d || l.w2.rows() != hidden ||
        l.w2.cols() != hidden || l.w3.rows() != 2 * d || l.w3.cols() != hidden ||
        l.b1.size() != hidden || l.b2.size() != hidden || l.b3.size() != 2 * d) {
      throw ValidationError("flow layer has inconsistent weight shapes");
    }
  }
  if (!std::is_sorted(train_loglik_sorted.begin(), train_loglik_sorted.end())) {
    throw ValidationError("train_loglik_sorted must be nondecreasing");
  }
}

namespace {

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

std::vector<double> flatten(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd unflatten(const std::vector<double>& data, int rows, int cols,
                          const std::string& what) {
  if (static_cast<int>(data.size()) != rows * cols) {
    throw ParseError("flow model field '" + what + "' has wrong length");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = data[k++];
  }
  return m;
}

Eigen::VectorXd unflatten_vec(const std::vector<double>& data, int size,
                              const std::string& what) {
  if (static_cast<int>(data.size()) != size) {
    throw ParseError("flow model field '" + what + "' has wrong length");
  }
  return Eigen::Map<const Eigen::VectorXd>(data.data(), size).eval();
}

}  // namespace

std::string FlowModel::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["ls_id"] = ls_id;
  j["dim"] = dim();
  j["hidden"] = hidden;
  j["n_flows"] = n_flows;
  j["widths"] = std::vector<int>{hidden, hidden};
  j["feature_mean"] = flatten(feature_mean);
  j["feature_std"] = flatten(feature_std);
  j["train_loglik_sorted"] = train_loglik_sorted;
  nlohmann::ordered_json jl = nlohmann::ordered_json::array();
  for (const FlowLayer& l : layers) {
    nlohmann::ordered_json e;
    e["w1"] = flatten(l.w1);
    e["b1"] = flatten(l.b1);
    e["w2"] = flatten(l.w2);
    e["b2"] = flatten(l.b2);
    e["w3"] = flatten(l.w3);
    e["b3"] = flatten(l.b3);
    jl.push_back(std::move(e));
  }
  j["layers"] = std::move(jl);
  return j.dump(2) + "\n";
}

FlowModel FlowModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid flow model JSON: ") + e.what());
  }
  try {
    if (!j.contains("version")) throw ParseError("flow model is missing the 'version' field");
    if (j.at("version").get<int>() != 1) {
      throw ParseError("unsupported flow model version " + j.at("version").dump());
    }
    FlowModel model;
    model.ls_id = j.at("ls_id").get<std::string>();
    const int d = j.at("dim").get<int>();
    model.hidden = j.at("hidden").get<int>();
    model.n_flows = j.at("n_flows").get<int>();
    model.feature_mean =
        unflatten_vec(j.at("feature_mean").get<std::vector<double>>(), d, "feature_mean");
    model.feature_std =
        unflatten_vec(j.at("feature_std").get<std::vector<double>>(), d, "feature_std");
    model.train_loglik_sorted = j.at("train_loglik_sorted").get<std::vector<double>>();
    for (const auto& e : j.at("layers")) {
      FlowLayer l;
      l.w1 = unflatten(e.at("w1").get<std::vector<double>>(), model.hidden, d, "w1");
      l.b1 = unflatten_vec(e.at("b1").get<std::vector<double>>(), model.hidden, "b1");
      l.w2 = unflatten(e.at("w2").get<std::vector<double>>(), model.hidden, model.hidden, "w2");
      l.b2 = unflatten_vec(e.at("b2").get<std::vector<double>>(), model.hidden, "b2");
      l.w3 = unflatten(e.at("w3").get<std::vector<double>>(), 2 * d, model.hidden, "w3");
      l.b3 = unflatten_vec(e.at("b3").get<std::vector<double>>(), 2 * d, "b3");
      model.layers.push_back(std::move(l));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid flow model JSON: ") + e.what());
  }
}

void FlowModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write flow model to '" + path + "'");
  out << to_json();
}

FlowModel FlowModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open flow model '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

FlowModel train_flow(const std::vector<EventSample>& samples, const TrainSettings& hyper,
                     std::uint64_t seed, TrainReport* report) {
  const int n = static_cast<int>(samples.size());
  if (n < 200) {
    throw ValidationError("flow training needs at least 200 event samples, got " +
                          std::to_string(n));
  }
  const int d = static_cast<int>(samples[0].features.size());
  if (d < 1) throw ValidationError("flow training needs at least one feature dimension");
  for (const EventSample& s : samples) {
    if (static_cast<int>(s.features.size()) != d) {
      throw ValidationError("event samples have inconsistent feature dimensions");
    }
  }
  if (hyper.epochs < 1 || hyper.batch_size < 1 || hyper.hidden < 1 || hyper.n_flows < 1 ||
      !(hyper.learning_rate > 0.0) || hyper.val_fraction < 0.0 || hyper.val_fraction > 0.5) {
    throw ValidationError("invalid flow training settings");
  }

  // Z-score standardization stats over all samples.
  Eigen::MatrixXd data(d, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) data(k, i) = samples[i].features[k];
  }
  Eigen::VectorXd mean = data.rowwise().mean();
  Eigen::VectorXd stddev(d);
  for (int k = 0; k < d; ++k) {
    const double var = (data.row(k).array() - mean(k)).square().mean();
    stddev(k) = std::max(std::sqrt(std::max(var, 0.0)), kStdFloor);
  }
  Eigen::MatrixXd x_all(d, n);
  for (int k = 0; k < d; ++k) {
    x_all.row(k) = (data.row(k).array() - mean(k)) / stddev(k);
  }
  double log_std_sum = 0.0;
  for (int k = 0; k < d; ++k) log_std_sum += std::log(stddev(k));

  RngStream rng = RngStream::substream(seed, 0xF10Au, 0);

  // Train/validation split on a shuffled index order.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const int n_val =
      hyper.val_fraction > 0.0
          ? std::clamp(static_cast<int>(std::lround(hyper.val_fraction * n)), 1, n - 1)
          : 0;
  const int n_train = n - n_val;
  Eigen::MatrixXd x_val(d, n_val);
  Eigen::MatrixXd x_train(d, n_train);
  for (int i = 0; i < n_val; ++i) x_val.col(i) = x_all.col(order[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n_train; ++i) {
    x_train.col(i) = x_all.col(order[static_cast<std::size_t>(n_val + i)]);
  }

  // Model: zero-initialized output layers make the initial stack an identity.
  FlowModel model;
  model.hidden = hyper.hidden;
  model.n_flows = hyper.n_flows;
  model.feature_mean = mean;
  model.feature_std = stddev;
  const double lim1 = std::sqrt(6.0 / (d + hyper.hidden));
  const double lim2 = std::sqrt(6.0 / (2.0 * hyper.hidden));
  for (int l = 0; l < hyper.n_flows; ++l) {
    FlowLayer layer;
    layer.w1 = Eigen::MatrixXd::Zero(hyper.hidden, d);
    layer.w2 = Eigen::MatrixXd::Zero(hyper.hidden, hyper.hidden);
    layer.w3 = Eigen::MatrixXd::Zero(2 * d, hyper.hidden);
    layer.b1 = Eigen::VectorXd::Zero(hyper.hidden);
    layer.b2 = Eigen::VectorXd::Zero(hyper.hidden);
    layer.b3 = Eigen::VectorXd::Zero(2 * d);
    for (int r = 0; r < hyper.hidden; ++r) {
      for (int c = 0; c < d; ++c) layer.w1(r, c) = rng.uniform(-lim1, lim1);
    }
    for (int r = 0; r < hyper.hidden; ++r) {
      for (int c = 0; c < hyper.hidden; ++c) layer.w2(r, c) = rng.uniform(-lim2, lim2);
    }
    model.layers.push_back(std::move(layer));
  }
  const FlowMasks& masks = model.masks();

  // Adam moments, one pair per parameter tensor.
  std::vector<FlowLayer> adam_m(model.layers.size());
  std::vector<FlowLayer> adam_v(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (FlowLayer* state : {&adam_m[l], &adam_v[l]}) {
      state->w1 = Eigen::MatrixXd::Zero(hyper.hidden, d);
      state->w2 = Eigen::MatrixXd::Zero(hyper.hidden, hyper.hidden);
      state->w3 = Eigen::MatrixXd::Zero(2 * d, hyper.hidden);
      state->b1 = Eigen::VectorXd::Zero(hyper.hidden);
      state->b2 = Eigen::VectorXd::Zero(hyper.hidden);
      state->b3 = Eigen::VectorXd::Zero(2 * d);
    }
  }

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  rep.sample_count = n;

  std::vector<int> train_order(static_cast<std::size_t>(n_train));
  for (int i = 0; i < n_train; ++i) train_order[static_cast<std::size_t>(i)] = i;
  std::vector<LayerCache> caches(model.layers.size());
  std::vector<FlowLayer> best_layers;
  double best_val = -std::numeric_limits<double>::infinity();
  int stall = 0;
  long long step = 0;

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    double lr = hyper.learning_rate;
    if (epoch >= 85) {
      lr *= 0.25;
    } else if (epoch >= 60) {
      lr *= 0.5;
    }
    for (int i = n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(train_order[static_cast<std::size_t>(i)], train_order[static_cast<std::size_t>(j)]);
    }
    for (int start = 0; start < n_train; start += hyper.batch_size) {
      const int b = std::min(hyper.batch_size, n_train - start);
      Eigen::MatrixXd batch(d, b);
      for (int i = 0; i < b; ++i) {
        batch.col(i) = x_train.col(train_order[static_cast<std::size_t>(start + i)]);
      }
      // Inverse pass with caches.
      Eigen::MatrixXd cur = batch;
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        flow_inverse_batch(model.layers[l], masks, cur, &caches[l]);
        cur = l + 1 < model.layers.size() ? reverse_rows(caches[l].u) : caches[l].u;
      }
      // Backward pass.
      Eigen::MatrixXd g = caches.back().u / b;
      ++step;
      const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step));
      for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
        LayerGrad grad;
        Eigen::MatrixXd g_x;
        flow_backward(model.layers[static_cast<std::size_t>(l)], masks,
                      caches[static_cast<std::size_t>(l)], g, 1.0 / b, &grad, &g_x);
        FlowLayer& layer = model.layers[static_cast<std::size_t>(l)];
        FlowLayer& m_state = adam_m[static_cast<std::size_t>(l)];
        FlowLayer& v_state = adam_v[static_cast<std::size_t>(l)];
        adam_update(&layer.w1, &m_state.w1, &v_state.w1, grad.w1, lr, bc1, bc2);
        adam_update(&layer.w2, &m_state.w2, &v_state.w2, grad.w2, lr, bc1, bc2);
        adam_update(&layer.w3, &m_state.w3, &v_state.w3, grad.w3, lr, bc1, bc2);
        adam_update(&layer.b1, &m_state.b1, &v_state.b1, grad.b1, lr, bc1, bc2);
        adam_update(&layer.b2, &m_state.b2, &v_state.b2, grad.b2, lr, bc1, bc2);
        adam_update(&layer.b3, &m_state.b3, &v_state.b3, grad.b3, lr, bc1, bc2);
        if (l > 0) g = reverse_rows(g_x);
      }
    }
    const double train_ll = mean_loglik_std(model.layers, masks, x_train) - log_std_sum;
    if (!std::isfinite(train_ll)) {
      throw ValidationError("flow training diverged (non-finite loss) at epoch " +
                            std::to_string(epoch));
    }
    rep.train_loglik.push_back(train_ll);
    rep.epochs_run = epoch;
    if (n_val > 0) {
      const double val_ll = mean_loglik_std(model.layers, masks, x_val) - log_std_sum;
      if (!std::isfinite(val_ll)) {
        throw ValidationError("flow training diverged (non-finite loss) at epoch " +
                              std::to_string(epoch));
      }
      if (val_ll > best_val) {
        best_val = val_ll;
        best_layers = model.layers;
        stall = 0;
      } else if (++stall >= hyper.patience) {
        break;
      }
    }
  }
  if (n_val > 0) {
    model.layers = best_layers;
    rep.val_loglik = best_val;
  } else if (!rep.train_loglik.empty()) {
    rep.val_loglik = rep.train_loglik.back();
  }

  // Training-set log-likelihoods (all provided samples) under final weights.
  model.train_loglik_sorted.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    model.train_loglik_sorted[static_cast<std::size_t>(i)] =
        model.log_likelihood(samples[static_cast<std::size_t>(i)].features);
  }
  std::sort(model.train_loglik_sorted.begin(), model.train_loglik_sorted.end());
  model.validate();
  return model;
}

}  // namespace scengen

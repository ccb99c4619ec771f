// Copyright 2026 The cropml Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Single-hidden-layer feedforward regressor with a flat parameter vector that
// backpropagation and the population optimizers share.
//
// Flat layout, for a network with I inputs and H hidden units:
//   [0, H*I)            input->hidden weights, row-major (row j = hidden unit j)
//   [H*I, H*I+H)        hidden biases
//   [H*I+H, H*I+2H)     hidden->output weights
//   [H*I+2H]            output bias

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cropml/error.hpp"
#include "cropml/random.hpp"

namespace cropml {

/// Activation catalog, numbered 1..5 so the values double as search indices.
enum class ActivationKind : int {
  kIdentity = 1,
  kLogistic = 2,
  kTanh = 3,
  kRectifier = 4,
  kSoftplus = 5,
};

inline constexpr int kMinActivationIndex = 1;
inline constexpr int kMaxActivationIndex = 5;

inline ActivationKind activation_from_index(int index) {
  if (index < kMinActivationIndex || index > kMaxActivationIndex)
    throw InvalidConfigError("activation index " + std::to_string(index) + " outside [1,5]");
  return static_cast<ActivationKind>(index);
}

inline int activation_index(ActivationKind kind) { return static_cast<int>(kind); }

inline std::string_view activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kIdentity: return "identity";
    case ActivationKind::kLogistic: return "logistic";
    case ActivationKind::kTanh: return "tanh";
    case ActivationKind::kRectifier: return "rectifier";
    case ActivationKind::kSoftplus: return "softplus";
  }
  return "unknown";
}

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kIdentity: return x;
    case ActivationKind::kLogistic: return logistic(x);
    case ActivationKind::kTanh: return std::tanh(x);
    case ActivationKind::kRectifier: return x > 0 ? x : 0.0;
    case ActivationKind::kSoftplus: return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return x;
}

/// Derivative of activate(kind, .) at x. The rectifier uses 0 at the kink.
inline double activate_deriv(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kIdentity: return 1.0;
    case ActivationKind::kLogistic: {
      const double s = logistic(x);
      return s * (1.0 - s);
    }
    case ActivationKind::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::kRectifier: return x > 0 ? 1.0 : 0.0;
    case ActivationKind::kSoftplus: return logistic(x);
  }
  return 1.0;
}

inline constexpr std::size_t kMinHidden = 2;
inline constexpr std::size_t kMaxHidden = 99;

struct NetworkTopology {
  std::size_t n_inputs = 1;
  std::size_t n_hidden = 2;
  ActivationKind hidden_activation = ActivationKind::kTanh;
  ActivationKind output_activation = ActivationKind::kIdentity;

  void validate() const {
    if (n_inputs < 1) throw InvalidConfigError("topology needs at least one input");
    if (n_hidden < kMinHidden || n_hidden > kMaxHidden)
      throw InvalidConfigError("hidden count " + std::to_string(n_hidden) + " outside (1, 100)");
  }

  std::size_t parameter_count() const { return (n_inputs + 1) * n_hidden + (n_hidden + 1); }

  bool operator==(const NetworkTopology&) const = default;
};

/// Weights and biases split into their layers.
struct LayerWeights {
  std::vector<double> input_weights;   // n_hidden x n_inputs, row-major
  std::vector<double> hidden_biases;   // n_hidden
  std::vector<double> output_weights;  // n_hidden
  double output_bias = 0.0;
};

class NetworkParams {
 public:
  NetworkParams(NetworkTopology topology, std::vector<double> values)
      : topology_(topology), values_(std::move(values)) {
    topology_.validate();
    if (values_.size() != topology_.parameter_count())
      throw InputShapeError("parameter vector has " + std::to_string(values_.size()) + " values, topology needs " +
                            std::to_string(topology_.parameter_count()));
  }

  /// All-zero parameters.
  explicit NetworkParams(NetworkTopology topology)
      : NetworkParams(topology, std::vector<double>(topology.parameter_count(), 0.0)) {}

  const NetworkTopology& topology() const noexcept { return topology_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> input_weights() const { return values().subspan(0, hidden() * inputs()); }
  std::span<const double> hidden_biases() const { return values().subspan(hidden() * inputs(), hidden()); }
  std::span<const double> output_weights() const {
    return values().subspan(hidden() * inputs() + hidden(), hidden());
  }
  double output_bias() const { return values_.back(); }

  LayerWeights unflatten() const {
    auto copy = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
    return {copy(input_weights()), copy(hidden_biases()), copy(output_weights()), output_bias()};
  }

  static NetworkParams flatten(const NetworkTopology& topology, const LayerWeights& layers) {
    std::vector<double> values;
    values.reserve(topology.parameter_count());
    values.insert(values.end(), layers.input_weights.begin(), layers.input_weights.end());
    values.insert(values.end(), layers.hidden_biases.begin(), layers.hidden_biases.end());
    values.insert(values.end(), layers.output_weights.begin(), layers.output_weights.end());
    values.push_back(layers.output_bias);
    return NetworkParams(topology, std::move(values));
  }

  bool operator==(const NetworkParams&) const = default;

 private:
  std::size_t inputs() const { return topology_.n_inputs; }
  std::size_t hidden() const { return topology_.n_hidden; }

  NetworkTopology topology_;
  std::vector<double> values_;
};

/// Row-major design matrix plus targets.
struct Samples {
  std::size_t n_features = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const noexcept { return targets.size(); }
  bool empty() const noexcept { return targets.empty(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(inputs).subspan(i * n_features, n_features);
  }

  void push_back(std::span<const double> features, double target) {
    if (features.size() != n_features) throw InputShapeError("sample width mismatch");
    inputs.insert(inputs.end(), features.begin(), features.end());
    targets.push_back(target);
  }
};

namespace detail {

inline void check_input(const NetworkParams& params, std::size_t width) {
  if (width != params.topology().n_inputs)
    throw InputShapeError("input has " + std::to_string(width) + " features, network expects " +
                          std::to_string(params.topology().n_inputs));
}

// Forward pass that also keeps hidden pre-activations and outputs.
inline double forward_cached(const NetworkParams& params, std::span<const double> input, std::span<double> z,
                             std::span<double> h, double& out_pre) {
  const auto& topo = params.topology();
  const auto w1 = params.input_weights();
  const auto b1 = params.hidden_biases();
  const auto w2 = params.output_weights();
  double o = params.output_bias();
  for (std::size_t j = 0; j < topo.n_hidden; ++j) {
    double acc = b1[j];
    const double* row = w1.data() + j * topo.n_inputs;
    for (std::size_t i = 0; i < topo.n_inputs; ++i) acc += row[i] * input[i];
    z[j] = acc;
    h[j] = activate(topo.hidden_activation, acc);
    o += w2[j] * h[j];
  }
  out_pre = o;
  return activate(topo.output_activation, o);
}

}  // namespace detail

inline double forward(const NetworkParams& params, std::span<const double> input) {
  detail::check_input(params, input.size());
  const std::size_t h = params.topology().n_hidden;
  std::vector<double> z(h), act(h);
  double o = 0;
  return detail::forward_cached(params, input, z, act, o);
}

inline std::vector<double> predict(const NetworkParams& params, const Samples& samples) {
  detail::check_input(params, samples.n_features);
  const std::size_t h = params.topology().n_hidden;
  std::vector<double> z(h), act(h), out(samples.size());
  double o = 0;
  for (std::size_t n = 0; n < samples.size(); ++n) out[n] = detail::forward_cached(params, samples.row(n), z, act, o);
  return out;
}

/// Mean squared error over the samples.
inline double mse(const NetworkParams& params, const Samples& samples) {
  if (samples.empty()) throw EmptyInputError("mse over an empty batch");
  const auto pred = predict(params, samples);
  double sum = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    const double r = pred[n] - samples.targets[n];
    sum += r * r;
  }
  return sum / static_cast<double>(pred.size());
}

struct LossAndGradient {
  double loss = 0;
  std::vector<double> gradient;
};

/// MSE and its gradient with respect to the flat parameter vector.
inline LossAndGradient loss_and_gradient(const NetworkParams& params, const Samples& batch) {
  if (batch.empty()) throw EmptyInputError("gradient of an empty batch");
  detail::check_input(params, batch.n_features);
  const auto& topo = params.topology();
  const std::size_t ni = topo.n_inputs, nh = topo.n_hidden;
  const auto w2 = params.output_weights();

  LossAndGradient result{0.0, std::vector<double>(params.size(), 0.0)};
  double* g_w1 = result.gradient.data();
  double* g_b1 = g_w1 + nh * ni;
  double* g_w2 = g_b1 + nh;
  double& g_b2 = result.gradient.back();

  std::vector<double> z(nh), h(nh);
  const double scale = 2.0 / static_cast<double>(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto x = batch.row(n);
    double o = 0;
    const double y = detail::forward_cached(params, x, z, h, o);
    const double residual = y - batch.targets[n];
    result.loss += residual * residual;
    const double d_out = scale * residual * activate_deriv(topo.output_activation, o);
    g_b2 += d_out;
    for (std::size_t j = 0; j < nh; ++j) {
      g_w2[j] += d_out * h[j];
      const double d_hidden = d_out * w2[j] * activate_deriv(topo.hidden_activation, z[j]);
      g_b1[j] += d_hidden;
      double* row = g_w1 + j * ni;
      for (std::size_t i = 0; i < ni; ++i) row[i] += d_hidden * x[i];
    }
  }
  result.loss /= static_cast<double>(batch.size());
  return result;
}

inline std::vector<double> gradient(const NetworkParams& params, const Samples& batch) {
  return loss_and_gradient(params, batch).gradient;
}

/// Uniform draws in [-scale, scale] from a generator seeded with `seed`.
inline NetworkParams init_params(const NetworkTopology& topology, std::uint64_t seed, double scale) {
  if (!(scale > 0)) throw InvalidConfigError("init scale must be positive");
  topology.validate();
  Rng rng(seed);
  std::vector<double> values(topology.parameter_count());
  for (auto& v : values) v = rng.uniform(-scale, scale);
  return NetworkParams(topology, std::move(values));
}

inline constexpr double kMaxLearningRate = 5.0;

struct TrainOptions {
  double learning_rate = 0.1;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
};

/// train_loss[e] and val_loss[e] are the losses after the update of epoch e+1.
struct TrainHistory {
  double initial_train_loss = 0;
  double initial_val_loss = 0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;  // 0 means the starting parameters were kept

  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  NetworkParams params;
  TrainHistory history;
};

/// Full-batch gradient descent on training MSE with early stopping: training
/// stops once validation loss has failed to improve for more than `patience`
/// consecutive epochs, and the parameters with the lowest validation loss seen
/// (including the starting point) are returned.
inline TrainResult train_backprop(NetworkParams params, const Samples& train, const Samples& val,
                                  const TrainOptions& options) {
  if (!(options.learning_rate > 0 && options.learning_rate <= kMaxLearningRate))
    throw InvalidConfigError("learning rate must lie in (0, 5]");
  if (options.max_epochs < 1) throw InvalidConfigError("max_epochs must be at least 1");
  if (train.empty()) throw EmptyInputError("empty training set");
  if (val.empty()) throw EmptyInputError("empty validation set");

  TrainHistory history;
  auto step = loss_and_gradient(params, train);
  history.initial_train_loss = step.loss;
  history.initial_val_loss = mse(params, val);
  if (!std::isfinite(step.loss) || !std::isfinite(history.initial_val_loss))
    throw DivergenceError(0, "non-finite loss at the starting parameters");

  NetworkParams best = params;
  double best_val = history.initial_val_loss;
  std::size_t stale = 0;
  auto values = params.values();
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] -= options.learning_rate * step.gradient[k];
    const double val_loss = mse(params, val);
    step = loss_and_gradient(params, train);
    if (!std::isfinite(step.loss) || !std::isfinite(val_loss)) throw DivergenceError(epoch, "non-finite loss");
    history.train_loss.push_back(step.loss);
    history.val_loss.push_back(val_loss);
    history.stopped_epoch = epoch;
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
      history.best_epoch = epoch;
      stale = 0;
    } else if (++stale > options.patience) {
      break;
    }
  }
  return {std::move(best), std::move(history)};
}

}  // namespace cropml

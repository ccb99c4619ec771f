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

// Hybrid trainers that pair a population optimizer with backpropagation.
//
//   ANN-ICA (meta mode, default): each country is a 4-vector
//     (hidden units, hidden activation index, output activation index,
//     learning rate); its cost is the validation RMSE of a network trained by
//     backprop under the inner budget. The winning meta-parameters are then
//     retrained under the final budget.
//   ANN-ICA (weights mode): ICA minimizes training MSE over the flat weight
//     vector, then backprop fine-tunes from the best country.
//   ANN-GWO: GWO minimizes training MSE over the flat weight vector inside
//     [-w, w]^P, then backprop fine-tunes from the best wolf.
//
// Training rows are ordered by year and the latest validation_fraction of
// them is held out for early stopping and meta-parameter scoring.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cropml/ann.hpp"
#include "cropml/bounds.hpp"
#include "cropml/data.hpp"
#include "cropml/error.hpp"
#include "cropml/gwo.hpp"
#include "cropml/ica.hpp"
#include "cropml/metrics.hpp"
#include "cropml/random.hpp"

namespace cropml {

/// FNV-1a over raw bytes.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string hex_digest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

enum class Method { kAnnIca, kAnnGwo, kBackprop };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::kAnnIca: return "ANN-ICA";
    case Method::kAnnGwo: return "ANN-GWO";
    case Method::kBackprop: return "BP";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  if (name == "ANN-ICA") return Method::kAnnIca;
  if (name == "ANN-GWO") return Method::kAnnGwo;
  if (name == "BP") return Method::kBackprop;
  throw InvalidConfigError("unknown method '" + std::string(name) + "' (expected ANN-ICA, ANN-GWO or BP)");
}

/// Meta-parameters searched by ANN-ICA.
struct HyperParams {
  std::size_t hidden = 10;       // x1, 1 < x1 < 100
  int hidden_activation = 3;     // x2, index in [1,5]
  int output_activation = 1;     // x3, index in [1,5]
  double learning_rate = 0.1;    // x4, in (0,5]

  void validate() const {
    if (hidden < kMinHidden || hidden > kMaxHidden) throw InvalidConfigError("hidden count outside (1,100)");
    activation_from_index(hidden_activation);
    activation_from_index(output_activation);
    if (!(learning_rate > 0 && learning_rate <= kMaxLearningRate))
      throw InvalidConfigError("learning rate outside (0,5]");
  }

  NetworkTopology topology(std::size_t n_inputs) const {
    return {n_inputs, hidden, activation_from_index(hidden_activation), activation_from_index(output_activation)};
  }

  std::vector<double> encode() const {
    return {static_cast<double>(hidden), static_cast<double>(hidden_activation),
            static_cast<double>(output_activation), learning_rate};
  }

  bool operator==(const HyperParams&) const = default;
};

inline constexpr double kMinLearningRate = 1e-4;

/// Rounds the integer coordinates and clamps every coordinate into range.
inline HyperParams decode_country(std::span<const double> position) {
  if (position.size() != 4) throw InputShapeError("a meta-parameter country has 4 coordinates");
  auto rounded = [](double v, long lo, long hi) { return std::clamp(std::lround(v), lo, hi); };
  HyperParams h;
  h.hidden = static_cast<std::size_t>(rounded(position[0], kMinHidden, kMaxHidden));
  h.hidden_activation = static_cast<int>(rounded(position[1], kMinActivationIndex, kMaxActivationIndex));
  h.output_activation = static_cast<int>(rounded(position[2], kMinActivationIndex, kMaxActivationIndex));
  h.learning_rate = std::clamp(position[3], kMinLearningRate, kMaxLearningRate);
  return h;
}

/// Search box for meta-parameter countries. Integer coordinates extend about
/// half a unit past their range so each integer owns an equal-width interval.
inline Bounds meta_parameter_bounds() {
  return {{kMinHidden - 0.5, kMinActivationIndex - 0.5, kMinActivationIndex - 0.5, 0.0},
          {kMaxHidden + 0.49, kMaxActivationIndex + 0.49, kMaxActivationIndex + 0.49, kMaxLearningRate}};
}

enum class IcaMode { kMetaParameters, kWeights };

struct HybridConfig {
  gwo::GwoConfig gwo;  // bounds and seed are filled in by the trainer
  ica::IcaConfig ica;  // bounds and seed are filled in by the trainer
  IcaMode ica_mode = IcaMode::kMetaParameters;
  /// Topology and learning rate for the weight-space trainers.
  HyperParams network;
  /// Backprop budget for each ANN-ICA fitness evaluation.
  TrainOptions inner{0.1, 200, 20};
  /// Backprop budget for the final model (learning rate taken from the model).
  TrainOptions final_training{0.1, 1000, 50};
  double validation_fraction = 0.2;
  double weight_bound = 5.0;
  double init_scale = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(validation_fraction > 0 && validation_fraction < 1))
      throw InvalidConfigError("validation_fraction must lie in (0,1)");
    if (!(weight_bound > 0)) throw InvalidConfigError("weight_bound must be positive");
    if (!(init_scale > 0)) throw InvalidConfigError("init_scale must be positive");
    network.validate();
  }
};

/// Canonical text form of every field; its hash is the config digest.
inline std::string describe(const HybridConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "gwo.pop_size=" << c.gwo.pop_size << "\ngwo.num_iter=" << c.gwo.num_iter << "\nica.n_countries="
      << c.ica.n_countries << "\nica.n_imperialists=" << c.ica.n_imperialists
      << "\nica.assimilation_coeff=" << c.ica.assimilation_coeff << "\nica.revolution_rate=" << c.ica.revolution_rate
      << "\nica.colony_weight=" << c.ica.colony_weight << "\nica.max_decades=" << c.ica.max_decades
      << "\nica.mode=" << (c.ica_mode == IcaMode::kMetaParameters ? "meta" : "weights")
      << "\nnetwork.hidden=" << c.network.hidden << "\nnetwork.hidden_activation=" << c.network.hidden_activation
      << "\nnetwork.output_activation=" << c.network.output_activation
      << "\nnetwork.learning_rate=" << c.network.learning_rate << "\ninner.max_epochs=" << c.inner.max_epochs
      << "\ninner.patience=" << c.inner.patience << "\nfinal.max_epochs=" << c.final_training.max_epochs
      << "\nfinal.patience=" << c.final_training.patience << "\nvalidation_fraction=" << c.validation_fraction
      << "\nweight_bound=" << c.weight_bound << "\ninit_scale=" << c.init_scale << "\nseed=" << c.seed << "\n";
  return out.str();
}

inline std::string config_digest(const HybridConfig& c) { return hex_digest(fnv1a(describe(c))); }

struct TrainedModel {
  NetworkParams params;
  HyperParams hyper;
  NormalizationStats normalization;
  Method method = Method::kBackprop;
  std::uint64_t seed = 0;
  std::string config_digest;
  TrainHistory history;       // backprop phase
  double phase1_loss = 0;     // optimizer incumbent's training MSE (weight-space modes)

  /// Hash of parameters, meta-parameters and provenance.
  std::string digest() const {
    std::string bytes(reinterpret_cast<const char*>(params.values().data()), params.size() * sizeof(double));
    std::ostringstream meta;
    meta.precision(17);
    meta << hyper.hidden << ',' << hyper.hidden_activation << ',' << hyper.output_activation << ','
         << hyper.learning_rate << ',' << method_name(method) << ',' << seed << ',' << config_digest;
    return hex_digest(fnv1a(meta.str(), fnv1a(bytes)));
  }
};

/// Normalized training and validation samples plus the statistics used.
struct PreparedData {
  NormalizationStats stats;
  Samples fit;
  Samples val;
};

/// Training rows ordered by year (stable), split so that the latest
/// validation_fraction of them (at least one row, leaving at least one) is
/// held out.
inline std::pair<Dataset, Dataset> holdout_split(const Dataset& train, double validation_fraction) {
  if (train.size() < 2) throw EmptyInputError("need at least two training rows");
  if (!(validation_fraction > 0 && validation_fraction < 1))
    throw InvalidConfigError("validation_fraction must lie in (0,1)");
  auto rows = train.records;
  std::stable_sort(rows.begin(), rows.end(), [](const CropRecord& l, const CropRecord& r) { return l.year < r.year; });
  auto n_val = static_cast<std::size_t>(std::ceil(validation_fraction * static_cast<double>(rows.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, rows.size() - 1);
  const auto cut = rows.begin() + static_cast<std::ptrdiff_t>(rows.size() - n_val);
  return {train.with_records({rows.begin(), cut}), train.with_records({cut, rows.end()})};
}

/// Holdout split plus min-max statistics fitted on all training rows.
inline PreparedData prepare_training(const Dataset& train, double validation_fraction) {
  auto [fit, val] = holdout_split(train, validation_fraction);
  auto stats = fit_normalization(train);
  return {stats, to_samples(apply_normalization(fit, stats)), to_samples(apply_normalization(val, stats))};
}

/// Seed of the network initialization shared by every fitness evaluation.
inline std::uint64_t init_seed(std::uint64_t seed) { return derive_seed(seed, {0x5eed}); }

/// Validation RMSE (normalized units) after training a fresh network with the
/// decoded meta-parameters. Divergence yields +infinity. A zero-epoch budget
/// scores the untrained network.
inline double ann_ica_fitness(std::span<const double> position, const Samples& fit, const Samples& val,
                              const TrainOptions& budget, std::uint64_t seed, double init_scale) {
  const HyperParams hyper = decode_country(position);
  const auto params = init_params(hyper.topology(fit.n_features), init_seed(seed), init_scale);
  if (budget.max_epochs == 0) return std::sqrt(mse(params, val));
  try {
    auto trained = train_backprop(params, fit, val, {hyper.learning_rate, budget.max_epochs, budget.patience});
    return std::sqrt(mse(trained.params, val));
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

namespace detail {

inline TrainedModel finish(TrainResult trained, const HyperParams& hyper, PreparedData& data, Method method,
                           const HybridConfig& config, double phase1_loss) {
  return {std::move(trained.params), hyper,       std::move(data.stats),
          method,                    config.seed, config_digest(config),
          std::move(trained.history), phase1_loss};
}

inline double training_mse(const NetworkTopology& topo, std::span<const double> weights, const Samples& fit) {
  return mse(NetworkParams(topo, {weights.begin(), weights.end()}), fit);
}

}  // namespace detail

/// Plain backprop from a seeded random initialization.
inline TrainedModel train_backprop_baseline(const Dataset& train, const HybridConfig& config,
                                            std::size_t extra_epochs = 0) {
  config.validate();
  auto data = prepare_training(train, config.validation_fraction);
  const auto topo = config.network.topology(data.fit.n_features);
  const auto start = init_params(topo, init_seed(config.seed), config.init_scale);
  const double start_loss = mse(start, data.fit);
  auto trained = train_backprop(start, data.fit, data.val,
                                {config.network.learning_rate, config.final_training.max_epochs + extra_epochs,
                                 config.final_training.patience});
  return detail::finish(std::move(trained), config.network, data, Method::kBackprop, config, start_loss);
}

inline gwo::GwoConfig weight_space_gwo(const HybridConfig& config, std::size_t n_params) {
  auto g = config.gwo;
  g.bounds = Bounds::uniform(n_params, -config.weight_bound, config.weight_bound);
  g.seed = derive_seed(config.seed, {0x6a0});
  return g;
}

/// GWO over the weight box, then backprop from the best wolf. With zero GWO
/// iterations the first member of the initial pack is used unevaluated.
inline TrainedModel train_ann_gwo(const Dataset& train, const HybridConfig& config) {
  config.validate();
  auto data = prepare_training(train, config.validation_fraction);
  const auto topo = config.network.topology(data.fit.n_features);
  const auto g = weight_space_gwo(config, topo.parameter_count());

  std::vector<double> start;
  if (g.num_iter == 0) {
    start = gwo::initial_pack(g).front().position;
  } else {
    auto result = gwo::optimize(
        [&](std::span<const double> w) { return detail::training_mse(topo, w, data.fit); }, g);
    start = std::move(result.best.position);
  }
  const NetworkParams incumbent(topo, std::move(start));
  const double phase1_loss = mse(incumbent, data.fit);
  auto trained = train_backprop(incumbent, data.fit, data.val,
                                {config.network.learning_rate, config.final_training.max_epochs,
                                 config.final_training.patience});
  return detail::finish(std::move(trained), config.network, data, Method::kAnnGwo, config, phase1_loss);
}

inline ica::IcaConfig weight_space_ica(const HybridConfig& config, std::size_t n_params) {
  auto c = config.ica;
  c.bounds = Bounds::uniform(n_params, -config.weight_bound, config.weight_bound);
  c.seed = derive_seed(config.seed, {0x1ca});
  return c;
}

/// ICA over the weight box, then backprop from the best country.
inline TrainedModel train_ica_weights(const Dataset& train, const HybridConfig& config) {
  config.validate();
  auto data = prepare_training(train, config.validation_fraction);
  const auto topo = config.network.topology(data.fit.n_features);
  auto result = ica::optimize([&](std::span<const double> w) { return detail::training_mse(topo, w, data.fit); },
                              weight_space_ica(config, topo.parameter_count()));
  const NetworkParams incumbent(topo, std::move(result.best.position));
  const double phase1_loss = mse(incumbent, data.fit);
  auto trained = train_backprop(incumbent, data.fit, data.val,
                                {config.network.learning_rate, config.final_training.max_epochs,
                                 config.final_training.patience});
  return detail::finish(std::move(trained), config.network, data, Method::kAnnIca, config, phase1_loss);
}

inline ica::IcaConfig meta_parameter_ica(const HybridConfig& config) {
  auto c = config.ica;
  c.bounds = meta_parameter_bounds();
  c.seed = derive_seed(config.seed, {0x1ca});
  return c;
}

struct MetaSearchResult {
  HyperParams best;
  double best_cost = 0;
  ica::IcaHistory history;
};

/// ICA over meta-parameters scored by ann_ica_fitness.
inline MetaSearchResult search_meta_parameters(const PreparedData& data, const HybridConfig& config) {
  auto result = ica::optimize(
      [&](std::span<const double> x) {
        return ann_ica_fitness(x, data.fit, data.val, config.inner, config.seed, config.init_scale);
      },
      meta_parameter_ica(config));
  return {decode_country(result.best.position), result.best.cost, std::move(result.history)};
}

/// Retrains `hyper` from the shared initialization under the final budget. If
/// the longer run diverges, the inner-budget run is used instead.
inline TrainResult retrain(const HyperParams& hyper, const PreparedData& data, const HybridConfig& config) {
  const auto start = init_params(hyper.topology(data.fit.n_features), init_seed(config.seed), config.init_scale);
  try {
    return train_backprop(start, data.fit, data.val,
                          {hyper.learning_rate, config.final_training.max_epochs, config.final_training.patience});
  } catch (const DivergenceError&) {
    return train_backprop(start, data.fit, data.val,
                          {hyper.learning_rate, std::max<std::size_t>(config.inner.max_epochs, 1),
                           config.inner.patience});
  }
}

/// ANN-ICA in the configured mode.
inline TrainedModel train_ann_ica(const Dataset& train, const HybridConfig& config) {
  config.validate();
  if (config.ica_mode == IcaMode::kWeights) return train_ica_weights(train, config);
  auto data = prepare_training(train, config.validation_fraction);
  const auto search = search_meta_parameters(data, config);
  auto trained = retrain(search.best, data, config);
  return detail::finish(std::move(trained), search.best, data, Method::kAnnIca, config, search.best_cost);
}

inline TrainedModel train_method(Method method, const Dataset& train, const HybridConfig& config) {
  switch (method) {
    case Method::kAnnIca: return train_ann_ica(train, config);
    case Method::kAnnGwo: return train_ann_gwo(train, config);
    case Method::kBackprop: return train_backprop_baseline(train, config);
  }
  throw InvalidConfigError("unknown method");
}

/// Predictions in target units for every record of `ds`.
inline std::vector<double> predict_yield(const TrainedModel& model, const Dataset& ds) {
  const auto samples = to_samples(apply_normalization(ds, model.normalization));
  auto pred = predict(model.params, samples);
  for (auto& p : pred) p = denormalize(p, model.normalization);
  return pred;
}

/// Test metrics in target units.
inline MetricsRow evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.empty()) throw EmptyInputError("empty test set");
  const auto pred = predict_yield(model, test);
  std::vector<double> targets;
  targets.reserve(test.size());
  for (const auto& r : test.records) targets.push_back(r.yield);
  return compute_metrics(targets, pred);
}

}  // namespace cropml

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

// Accuracy measures for paired targets A and predictions P:
//   RMSE = sqrt(mean((A - P)^2))
//   R    = sqrt(1 - sum((A - P)^2) / sum(A^2))     (no mean-centering)
//   MAE  = mean(|A - P|),  MAE% = 100 * MAE / mean(A)

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "cropml/bounds.hpp"
#include "cropml/error.hpp"

namespace cropml {

namespace detail {

inline void check_pairs(std::span<const double> targets, std::span<const double> predictions) {
  if (targets.empty() || predictions.empty()) throw EmptyInputError("metric over empty vectors");
  check_same_length(targets.size(), predictions.size(), "metric");
}

inline double sum_squared_residuals(std::span<const double> a, std::span<const double> p) {
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - p[i]) * (a[i] - p[i]);
  return sum;
}

}  // namespace detail

inline double rmse(std::span<const double> targets, std::span<const double> predictions) {
  detail::check_pairs(targets, predictions);
  return std::sqrt(detail::sum_squared_residuals(targets, predictions) / static_cast<double>(targets.size()));
}

inline double mae(std::span<const double> targets, std::span<const double> predictions) {
  detail::check_pairs(targets, predictions);
  double sum = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) sum += std::abs(targets[i] - predictions[i]);
  return sum / static_cast<double>(targets.size());
}

inline double mae_percent(std::span<const double> targets, std::span<const double> predictions) {
  detail::check_pairs(targets, predictions);
  double mean = 0;
  for (double a : targets) mean += a;
  mean /= static_cast<double>(targets.size());
  if (mean == 0) throw UndefinedDenominatorError("mae_percent with zero mean target");
  return 100.0 * mae(targets, predictions) / mean;
}

struct RIndex {
  double value = 0;
  bool clamped = false;  // radicand was negative and the value forced to 0
};

/// Correlation index with the radicand clamped at zero.
inline RIndex r_index(std::span<const double> targets, std::span<const double> predictions) {
  detail::check_pairs(targets, predictions);
  double denom = 0;
  for (double a : targets) denom += a * a;
  if (denom == 0) throw UndefinedDenominatorError("r_index with all-zero targets");
  const double radicand = 1.0 - detail::sum_squared_residuals(targets, predictions) / denom;
  if (radicand < 0) return {0.0, true};
  return {std::sqrt(radicand), false};
}

/// Conventional Pearson correlation. Diagnostic only; reports use r_index.
inline double pearson(std::span<const double> targets, std::span<const double> predictions) {
  detail::check_pairs(targets, predictions);
  const double n = static_cast<double>(targets.size());
  double ma = 0, mp = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ma += targets[i];
    mp += predictions[i];
  }
  ma /= n;
  mp /= n;
  double sap = 0, saa = 0, spp = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    sap += (targets[i] - ma) * (predictions[i] - mp);
    saa += (targets[i] - ma) * (targets[i] - ma);
    spp += (predictions[i] - mp) * (predictions[i] - mp);
  }
  if (saa == 0 || spp == 0) throw UndefinedDenominatorError("pearson with a constant vector");
  return sap / std::sqrt(saa * spp);
}

struct MetricsRow {
  double r = 0;
  double mae_pct = 0;
  double rmse = 0;
  std::size_t n = 0;
  bool r_clamped = false;
};

inline MetricsRow compute_metrics(std::span<const double> targets, std::span<const double> predictions) {
  const auto r = r_index(targets, predictions);
  return {r.value, mae_percent(targets, predictions), rmse(targets, predictions), targets.size(), r.clamped};
}

}  // namespace cropml

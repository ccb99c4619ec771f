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

// Grey Wolf Optimizer over a bounded real box (minimization).
//
// Every wolf moves toward the average of three candidate positions, one per
// leader (alpha, beta, delta):
//
//   D_k = |C_k * X_k - X|,   X'_k = X_k - A_k * D_k,   X(t+1) = (X'_1 + X'_2 + X'_3) / 3
//   A = 2a * r1 - a,   C = 2 * r2,   a = 2 - t * (2 / num_iter)
//
// with r1, r2 ~ U[0,1] drawn fresh per component, per leader, per wolf and per
// iteration. Leaders are frozen for the whole iteration, every wolf (leaders
// included) moves, and the best wolf ever evaluated is kept separately.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "cropml/bounds.hpp"
#include "cropml/error.hpp"
#include "cropml/parallel.hpp"
#include "cropml/random.hpp"

namespace cropml::gwo {

inline constexpr double kUnevaluated = std::numeric_limits<double>::infinity();

struct Wolf {
  std::vector<double> position;
  double fitness = kUnevaluated;

  bool operator==(const Wolf&) const = default;
};

struct LeaderTriplet {
  Wolf alpha;
  Wolf beta;
  Wolf delta;
};

struct GwoConfig {
  std::size_t pop_size = 30;
  std::size_t num_iter = 200;
  Bounds bounds;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // fitness evaluations only

  void validate() const {
    if (pop_size < 3) throw InvalidConfigError("gwo pop_size must be at least 3");
    if (num_iter < 1) throw InvalidConfigError("gwo num_iter must be at least 1");
    bounds.validate();
  }
};

struct GwoHistory {
  std::vector<double> best_fitness;  // best-so-far after each iteration
  Wolf best;
};

struct GwoResult {
  Wolf best;
  GwoHistory history;
};

/// a = 2 - t * (2 / num_iter).
inline double coefficient_a(std::size_t t, std::size_t num_iter) {
  if (num_iter == 0) throw InvalidConfigError("num_iter must be positive");
  if (t > num_iter) throw InvalidConfigError("iteration index exceeds num_iter");
  return 2.0 - static_cast<double>(t) * (2.0 / static_cast<double>(num_iter));
}

struct Coefficients {
  std::vector<double> A;
  std::vector<double> C;
};

/// Draws r1 for all `dim` components first, then r2 for all components.
template <UniformSource Source>
Coefficients sample_coefficients(double a, Source& rng, std::size_t dim) {
  Coefficients out{std::vector<double>(dim), std::vector<double>(dim)};
  for (auto& A : out.A) A = 2.0 * a * rng.uniform01() - a;
  for (auto& C : out.C) C = 2.0 * rng.uniform01();
  return out;
}

inline std::vector<double> leader_distance(std::span<const double> C, std::span<const double> leader,
                                           std::span<const double> wolf) {
  check_same_length(C.size(), leader.size(), "leader_distance");
  check_same_length(leader.size(), wolf.size(), "leader_distance");
  std::vector<double> D(C.size());
  for (std::size_t k = 0; k < D.size(); ++k) D[k] = std::abs(C[k] * leader[k] - wolf[k]);
  return D;
}

inline std::vector<double> candidate_position(std::span<const double> leader, std::span<const double> A,
                                              std::span<const double> D) {
  check_same_length(leader.size(), A.size(), "candidate_position");
  check_same_length(A.size(), D.size(), "candidate_position");
  std::vector<double> X(leader.size());
  for (std::size_t k = 0; k < X.size(); ++k) X[k] = leader[k] - A[k] * D[k];
  return X;
}

/// New position for `wolf`. Coefficients are drawn alpha, then beta, then delta.
template <UniformSource Source>
std::vector<double> update_position(std::span<const double> wolf, const LeaderTriplet& leaders, double a, Source& rng,
                                    const Bounds& bounds) {
  const std::size_t dim = wolf.size();
  check_same_length(dim, bounds.dim(), "update_position");
  std::vector<double> next(dim, 0.0);
  for (const Wolf* leader : {&leaders.alpha, &leaders.beta, &leaders.delta}) {
    check_same_length(dim, leader->position.size(), "update_position");
    const auto coeff = sample_coefficients(a, rng, dim);
    const auto D = leader_distance(coeff.C, leader->position, wolf);
    const auto X = candidate_position(leader->position, coeff.A, D);
    for (std::size_t k = 0; k < dim; ++k) next[k] += X[k];
  }
  for (auto& v : next) v /= 3.0;
  bounds.clamp(next);
  return next;
}

/// Three fittest wolves; ties keep pack order.
inline LeaderTriplet rank_leaders(std::span<const Wolf> pack) {
  if (pack.size() < 3) throw InvalidConfigError("a pack needs at least three wolves");
  std::vector<std::size_t> order(pack.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return pack[l].fitness < pack[r].fitness; });
  return {pack[order[0]], pack[order[1]], pack[order[2]]};
}

/// Unevaluated starting pack, uniform in the box.
inline std::vector<Wolf> initial_pack(const GwoConfig& config) {
  config.bounds.validate();
  Rng rng(derive_seed(config.seed, {0x1417}));
  std::vector<Wolf> pack(config.pop_size);
  for (auto& wolf : pack) wolf.position = config.bounds.sample(rng);
  return pack;
}

inline double sanitize_fitness(double f) { return std::isfinite(f) ? f : kUnevaluated; }

/// Minimizes `fitness` over the configured box. Each iteration evaluates the
/// pack, refreshes the leaders and best-so-far record, then moves every wolf.
/// Non-finite fitness values count as +infinity.
template <typename Fitness>
GwoResult optimize(Fitness&& fitness, const GwoConfig& config) {
  config.validate();
  auto pack = initial_pack(config);

  GwoResult result;
  bool have_best = false;
  for (std::size_t t = 0; t < config.num_iter; ++t) {
    parallel_for(pack.size(), config.threads, [&](std::size_t i) {
      pack[i].fitness = sanitize_fitness(fitness(std::span<const double>(pack[i].position)));
    });
    const LeaderTriplet leaders = rank_leaders(pack);
    if (!have_best || leaders.alpha.fitness < result.best.fitness) {
      result.best = leaders.alpha;
      have_best = true;
    }
    result.history.best_fitness.push_back(result.best.fitness);

    const double a = coefficient_a(t, config.num_iter);
    for (std::size_t i = 0; i < pack.size(); ++i) {
      Rng rng(derive_seed(config.seed, {t + 1, i}));
      pack[i].position = update_position(pack[i].position, leaders, a, rng, config.bounds);
      pack[i].fitness = kUnevaluated;
    }
  }
  result.history.best = result.best;
  return result;
}

}  // namespace cropml::gwo

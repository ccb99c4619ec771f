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

// Imperialist Competitive Algorithm over a bounded real box (minimization).
//
// A decade applies, in order: assimilation of every colony toward its
// imperialist, revolution (random re-sampling of a fraction of colonies),
// re-evaluation, imperialist/colony swaps, and one round of imperialistic
// competition in which the weakest empire loses its weakest colony and is
// dissolved once it has none left. The run ends when a single empire
// remains or after max_decades.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "cropml/bounds.hpp"
#include "cropml/error.hpp"
#include "cropml/parallel.hpp"
#include "cropml/random.hpp"

namespace cropml::ica {

inline constexpr double kUnevaluated = std::numeric_limits<double>::infinity();

struct Country {
  std::vector<double> position;
  double cost = kUnevaluated;

  bool operator==(const Country&) const = default;
};

struct Empire {
  Country imperialist;
  std::vector<Country> colonies;

  std::size_t size() const noexcept { return 1 + colonies.size(); }
};

struct IcaConfig {
  std::size_t n_countries = 50;
  std::size_t n_imperialists = 5;
  double assimilation_coeff = 2.0;  // beta
  double revolution_rate = 0.1;
  double colony_weight = 0.1;  // xi
  std::size_t max_decades = 200;
  Bounds bounds;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // fitness evaluations only

  void validate() const {
    if (n_imperialists < 1 || n_imperialists >= n_countries)
      throw InvalidConfigError("ica needs 1 <= n_imperialists < n_countries");
    if (!(assimilation_coeff > 0)) throw InvalidConfigError("ica assimilation_coeff must be positive");
    if (!(revolution_rate >= 0 && revolution_rate <= 1)) throw InvalidConfigError("ica revolution_rate outside [0,1]");
    if (!(colony_weight >= 0 && colony_weight <= 1)) throw InvalidConfigError("ica colony_weight outside [0,1]");
    bounds.validate();
  }
};

struct IcaHistory {
  std::vector<double> best_cost;
  std::vector<std::size_t> empire_count;
  Country best;
};

struct IcaResult {
  Country best;
  IcaHistory history;
};

namespace detail {

// Replaces non-finite entries by (largest finite entry + 1) so that
// differences stay finite.
inline std::vector<double> finite_costs(std::span<const double> costs) {
  double max_finite = -std::numeric_limits<double>::infinity();
  for (double c : costs)
    if (std::isfinite(c)) max_finite = std::max(max_finite, c);
  const double fill = std::isfinite(max_finite) ? max_finite + 1.0 : 0.0;
  std::vector<double> out(costs.begin(), costs.end());
  for (auto& c : out)
    if (!std::isfinite(c)) c = fill;
  return out;
}

// power_i = max_cost - cost_i, where max_cost is taken over `costs`.
inline std::vector<double> powers(std::span<const double> costs) {
  const auto finite = finite_costs(costs);
  const double max_cost = *std::max_element(finite.begin(), finite.end());
  std::vector<double> p(finite.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = max_cost - finite[i];
  return p;
}

}  // namespace detail

/// Splits `total` items across weights by largest remainder. Equal fractional
/// parts go to the lower index. All-zero weights split uniformly.
inline std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> counts(n, 0);
  if (n == 0) return counts;
  double sum = 0;
  for (double w : weights) sum += w;
  std::vector<double> quota(n);
  for (std::size_t i = 0; i < n; ++i)
    quota[i] = sum > 0 ? static_cast<double>(total) * weights[i] / sum
                       : static_cast<double>(total) / static_cast<double>(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    counts[i] = static_cast<std::size_t>(std::floor(quota[i]));
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return quota[l] - std::floor(quota[l]) > quota[r] - std::floor(quota[r]);
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++counts[order[k]];
  return counts;
}

/// The n_imperialists cheapest countries become imperialists; the remaining
/// countries are shuffled and dealt out in proportion to imperialist power
/// (max cost over all countries minus imperialist cost).
template <UniformSource Source>
std::vector<Empire> form_empires(std::vector<Country> countries, std::size_t n_imperialists, Source& rng) {
  if (n_imperialists < 1 || n_imperialists >= countries.size())
    throw InvalidConfigError("form_empires needs 1 <= n_imperialists < number of countries");
  std::stable_sort(countries.begin(), countries.end(),
                   [](const Country& l, const Country& r) { return l.cost < r.cost; });

  std::vector<double> costs;
  costs.reserve(countries.size());
  for (const auto& c : countries) costs.push_back(c.cost);
  const auto all_powers = detail::powers(costs);
  const std::span<const double> imperial_powers(all_powers.data(), n_imperialists);

  std::vector<Country> colonies(countries.begin() + static_cast<std::ptrdiff_t>(n_imperialists), countries.end());
  shuffle_with(rng, colonies);
  const auto counts = apportion(imperial_powers, colonies.size());

  std::vector<Empire> empires(n_imperialists);
  auto next = colonies.begin();
  for (std::size_t e = 0; e < n_imperialists; ++e) {
    empires[e].imperialist = std::move(countries[e]);
    for (std::size_t k = 0; k < counts[e]; ++k) empires[e].colonies.push_back(std::move(*next++));
  }
  return empires;
}

/// Moves each colony toward its imperialist, one uniform draw per component:
/// x += u * beta * (imperialist - x). Costs are left stale.
template <UniformSource Source>
void assimilate(Empire& empire, double beta, Source& rng, const Bounds& bounds) {
  if (!(beta > 0)) throw InvalidConfigError("assimilation coefficient must be positive");
  const auto& target = empire.imperialist.position;
  for (auto& colony : empire.colonies) {
    check_same_length(colony.position.size(), target.size(), "assimilate");
    for (std::size_t k = 0; k < target.size(); ++k)
      colony.position[k] += rng.uniform01() * beta * (target[k] - colony.position[k]);
    bounds.clamp(colony.position);
  }
}

/// Each colony is re-sampled uniformly in the box with probability `rate`.
template <UniformSource Source>
void revolve(Empire& empire, double rate, Source& rng, const Bounds& bounds) {
  if (!(rate >= 0 && rate <= 1)) throw InvalidConfigError("revolution rate outside [0,1]");
  for (auto& colony : empire.colonies)
    if (rng.uniform01() < rate) colony.position = bounds.sample(rng);
}

/// Swaps the imperialist with its cheapest colony when that colony is
/// strictly cheaper. Among equally cheap colonies the first one wins.
/// Returns true when a swap happened.
inline bool swap_if_better(Empire& empire) {
  if (empire.colonies.empty()) return false;
  std::size_t best = 0;
  for (std::size_t k = 1; k < empire.colonies.size(); ++k)
    if (empire.colonies[k].cost < empire.colonies[best].cost) best = k;
  if (!(empire.colonies[best].cost < empire.imperialist.cost)) return false;
  std::swap(empire.imperialist, empire.colonies[best]);
  return true;
}

/// Imperialist cost plus xi times the mean colony cost; lower is stronger.
inline double empire_total_cost(const Empire& empire, double xi) {
  if (empire.colonies.empty()) return empire.imperialist.cost;
  double sum = 0;
  for (const auto& c : empire.colonies) sum += c.cost;
  return empire.imperialist.cost + xi * sum / static_cast<double>(empire.colonies.size());
}

/// Picks an index by roulette over `weights`; uniform if they sum to zero.
template <UniformSource Source>
std::size_t roulette(std::span<const double> weights, Source& rng) {
  double sum = 0;
  for (double w : weights) sum += w;
  if (!(sum > 0)) return draw_index(rng, weights.size());
  const double target = rng.uniform01() * sum;
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  return weights.size() - 1;
}

/// One round of imperialistic competition. The weakest empire (highest total
/// cost, first on ties) hands its weakest colony to an empire chosen by
/// roulette over the powers of the other empires. An empire with no colonies
/// left is dissolved and its imperialist joins the same winner.
template <UniformSource Source>
void compete(std::vector<Empire>& empires, double xi, Source& rng) {
  if (empires.size() < 2) return;
  std::vector<double> totals;
  totals.reserve(empires.size());
  for (const auto& e : empires) totals.push_back(empire_total_cost(e, xi));
  const auto finite = detail::finite_costs(totals);
  const std::size_t weakest =
      static_cast<std::size_t>(std::max_element(finite.begin(), finite.end()) - finite.begin());

  std::vector<std::size_t> rivals;
  std::vector<double> weights;
  for (std::size_t e = 0; e < empires.size(); ++e) {
    if (e == weakest) continue;
    rivals.push_back(e);
    weights.push_back(finite[weakest] - finite[e]);
  }
  const std::size_t winner = rivals[roulette<Source>(weights, rng)];

  Empire& loser = empires[weakest];
  if (!loser.colonies.empty()) {
    auto worst = loser.colonies.begin();
    for (auto it = loser.colonies.begin(); it != loser.colonies.end(); ++it)
      if (it->cost > worst->cost) worst = it;
    empires[winner].colonies.push_back(std::move(*worst));
    loser.colonies.erase(worst);
  }
  if (loser.colonies.empty()) {
    empires[winner].colonies.push_back(std::move(loser.imperialist));
    empires.erase(empires.begin() + static_cast<std::ptrdiff_t>(weakest));
  }
}

inline std::size_t country_count(const std::vector<Empire>& empires) {
  std::size_t n = 0;
  for (const auto& e : empires) n += e.size();
  return n;
}

inline double sanitize_cost(double c) { return std::isfinite(c) ? c : kUnevaluated; }

/// Initial countries, uniform in the box and unevaluated.
inline std::vector<Country> initial_countries(const IcaConfig& config) {
  config.bounds.validate();
  Rng rng(derive_seed(config.seed, {0x1ca}));
  std::vector<Country> countries(config.n_countries);
  for (auto& c : countries) c.position = config.bounds.sample(rng);
  return countries;
}

/// Minimizes `fitness` over the configured box. Non-finite costs count as
/// +infinity. With max_decades == 0 the best initial country is returned.
template <typename Fitness>
IcaResult optimize(Fitness&& fitness, const IcaConfig& config) {
  config.validate();
  auto evaluate = [&](std::vector<Country*>& batch) {
    parallel_for(batch.size(), config.threads, [&](std::size_t i) {
      batch[i]->cost = sanitize_cost(fitness(std::span<const double>(batch[i]->position)));
    });
  };

  auto countries = initial_countries(config);
  {
    std::vector<Country*> batch;
    for (auto& c : countries) batch.push_back(&c);
    evaluate(batch);
  }
  IcaResult result;
  result.best = *std::min_element(countries.begin(), countries.end(),
                                  [](const Country& l, const Country& r) { return l.cost < r.cost; });

  Rng rng(derive_seed(config.seed, {0xdecade}));
  auto empires = form_empires(std::move(countries), config.n_imperialists, rng);
  for (std::size_t decade = 0; decade < config.max_decades && empires.size() > 1; ++decade) {
    for (auto& empire : empires) {
      assimilate(empire, config.assimilation_coeff, rng, config.bounds);
      revolve(empire, config.revolution_rate, rng, config.bounds);
    }
    std::vector<Country*> batch;
    for (auto& empire : empires)
      for (auto& colony : empire.colonies) batch.push_back(&colony);
    evaluate(batch);
    for (const Country* c : batch)
      if (c->cost < result.best.cost) result.best = *c;
    for (auto& empire : empires) swap_if_better(empire);
    compete(empires, config.colony_weight, rng);
    result.history.best_cost.push_back(result.best.cost);
    result.history.empire_count.push_back(empires.size());
  }
  result.history.best = result.best;
  return result;
}

}  // namespace cropml::ica

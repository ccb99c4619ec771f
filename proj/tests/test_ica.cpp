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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cropml/ica.hpp"

namespace cropml::ica {
namespace {

struct Scripted {
  std::vector<double> values;
  std::size_t next = 0;
  double uniform01() { return values.at(next++); }
};

struct Constant {
  double value;
  double uniform01() { return value; }
};

double sphere(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

Country at(std::vector<double> pos, double cost) { return {std::move(pos), cost}; }

std::vector<Country> costed(const std::vector<double>& costs) {
  std::vector<Country> out;
  for (std::size_t i = 0; i < costs.size(); ++i) out.push_back(at({static_cast<double>(i)}, costs[i]));
  return out;
}

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion(std::vector<double>{9, 8}, 8), (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(apportion(std::vector<double>{1, 1, 1}, 7), (std::vector<std::size_t>{3, 2, 2}));
  EXPECT_EQ(apportion(std::vector<double>{0, 0}, 5), (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(apportion(std::vector<double>{3, 0}, 4), (std::vector<std::size_t>{4, 0}));
}

TEST(FormEmpires, HandApportionment) {
  // Imperialists cost 1 and 2; the costliest country costs 10.
  Rng rng(1);
  const auto empires = form_empires(costed({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 2, rng);
  ASSERT_EQ(empires.size(), 2u);
  EXPECT_EQ(empires[0].imperialist.cost, 1.0);
  EXPECT_EQ(empires[1].imperialist.cost, 2.0);
  EXPECT_EQ(empires[0].colonies.size(), 4u);
  EXPECT_EQ(empires[1].colonies.size(), 4u);
}

TEST(FormEmpires, SingleImperialistTakesAll) {
  Rng rng(2);
  const auto empires = form_empires(costed({5, 3, 9, 1, 7}), 1, rng);
  ASSERT_EQ(empires.size(), 1u);
  EXPECT_EQ(empires[0].imperialist.cost, 1.0);
  EXPECT_EQ(empires[0].colonies.size(), 4u);
}

TEST(FormEmpires, EqualCostsSplitEvenly) {
  Rng rng(3);
  const auto empires = form_empires(costed(std::vector<double>(23, 4.0)), 4, rng);
  std::size_t lo = 100, hi = 0;
  for (const auto& e : empires) lo = std::min(lo, e.colonies.size()), hi = std::max(hi, e.colonies.size());
  EXPECT_LE(hi - lo, 1u);
  EXPECT_EQ(country_count(empires), 23u);
}

TEST(FormEmpires, InfiniteCostsStayFinite) {
  Rng rng(4);
  const double inf = std::numeric_limits<double>::infinity();
  const auto empires = form_empires(costed({inf, 2, inf, 1, 3, inf}), 2, rng);
  EXPECT_EQ(country_count(empires), 6u);
}

TEST(FormEmpires, InvalidCounts) {
  Rng rng(5);
  EXPECT_THROW(form_empires(costed({1, 2}), 2, rng), InvalidConfigError);
  EXPECT_THROW(form_empires(costed({1, 2}), 0, rng), InvalidConfigError);
}

TEST(Assimilate, Cases) {
  const Bounds box = Bounds::uniform(1, -10, 10);
  Empire still{at({3}, 0), {at({3}, 1)}};
  Rng rng(1);
  assimilate(still, 2.0, rng, box);
  EXPECT_EQ(still.colonies[0].position[0], 3.0);

  Empire full{at({4, -2}, 0), {at({0, 0}, 1)}};
  Constant one{1.0};
  assimilate(full, 1.0, one, Bounds::uniform(2, -10, 10));
  EXPECT_EQ(full.colonies[0].position, (std::vector<double>{4, -2}));

  Empire half{at({4}, 0), {at({0}, 1)}};
  Constant h{0.5};
  assimilate(half, 2.0, h, box);
  EXPECT_EQ(half.colonies[0].position[0], 4.0);

  EXPECT_THROW(assimilate(half, 0.0, h, box), InvalidConfigError);
}

TEST(Assimilate, OvershootIsClamped) {
  Empire e{at({9}, 0), {at({-9}, 1)}};
  Constant one{1.0};
  assimilate(e, 3.0, one, Bounds::uniform(1, -10, 10));
  EXPECT_EQ(e.colonies[0].position[0], 10.0);
}

TEST(Revolve, RateBounds) {
  const Bounds box = Bounds::uniform(2, -1, 1);
  Rng rng(6);
  Empire e{at({0, 0}, 0), {}};
  for (int i = 0; i < 20; ++i) e.colonies.push_back(at({5, 5}, 1));  // outside the box on purpose
  Empire same = e;
  revolve(same, 0.0, rng, box);
  for (const auto& c : same.colonies) EXPECT_EQ(c.position, (std::vector<double>{5, 5}));
  revolve(e, 1.0, rng, box);
  for (const auto& c : e.colonies) EXPECT_TRUE(box.contains(c.position));
  EXPECT_THROW(revolve(e, 1.5, rng, box), InvalidConfigError);
}

TEST(Revolve, ResampleFraction) {
  const Bounds box = Bounds::uniform(1, -1, 1);
  Rng rng(7);
  Empire e{at({0}, 0), std::vector<Country>(10000, at({5}, 1))};
  revolve(e, 0.1, rng, box);
  std::size_t moved = 0;
  for (const auto& c : e.colonies) moved += c.position[0] != 5.0;
  EXPECT_GE(moved, 800u);
  EXPECT_LE(moved, 1200u);
}

TEST(SwapIfBetter, Cases) {
  Empire worse{at({0}, 1.0), {at({1}, 2.0), at({2}, 3.0)}};
  EXPECT_FALSE(swap_if_better(worse));
  EXPECT_EQ(worse.imperialist.cost, 1.0);

  Empire forced{at({0}, 1.0), {at({1}, 2.0), at({2}, 0.5)}};
  EXPECT_TRUE(swap_if_better(forced));
  EXPECT_EQ(forced.imperialist.position[0], 2.0);
  EXPECT_EQ(forced.colonies[1].position[0], 0.0);

  Empire tie{at({0}, 1.0), {at({1}, 0.5), at({2}, 0.5)}};
  EXPECT_TRUE(swap_if_better(tie));
  EXPECT_EQ(tie.imperialist.position[0], 1.0);

  Empire equal{at({0}, 1.0), {at({1}, 1.0)}};
  EXPECT_FALSE(swap_if_better(equal));
}

TEST(TotalCost, Cases) {
  const Empire e{at({0}, 1.0), {at({1}, 2.0), at({2}, 4.0)}};
  EXPECT_EQ(empire_total_cost(e, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(empire_total_cost(e, 0.1), 1.3);
  EXPECT_EQ(empire_total_cost(Empire{at({0}, 2.5), {}}, 0.1), 2.5);
}

TEST(Compete, WeakerLosesOneColony) {
  std::vector<Empire> empires{{at({0}, 1.0), {at({1}, 2.0), at({2}, 3.0)}},
                              {at({3}, 5.0), {at({4}, 6.0), at({5}, 9.0)}}};
  Constant zero{0.0};
  compete(empires, 0.1, zero);
  ASSERT_EQ(empires.size(), 2u);
  EXPECT_EQ(empires[0].colonies.size(), 3u);
  EXPECT_EQ(empires[1].colonies.size(), 1u);
  EXPECT_EQ(empires[0].colonies.back().cost, 9.0);  // the weakest colony moves
  EXPECT_EQ(country_count(empires), 6u);
}

TEST(Compete, EmptyEmpireIsAbsorbed) {
  std::vector<Empire> empires{{at({0}, 1.0), {at({1}, 2.0)}}, {at({3}, 5.0), {}}, {at({4}, 0.5), {at({5}, 1.0)}}};
  Constant zero{0.0};
  compete(empires, 0.1, zero);
  ASSERT_EQ(empires.size(), 2u);
  EXPECT_EQ(country_count(empires), 5u);
}

TEST(Compete, SingleEmpireUnchanged) {
  std::vector<Empire> empires{{at({0}, 1.0), {at({1}, 2.0)}}};
  Constant zero{0.0};
  compete(empires, 0.1, zero);
  EXPECT_EQ(empires.size(), 1u);
  EXPECT_EQ(empires[0].colonies.size(), 1u);
}

TEST(Roulette, WeightsAndUniformFallback) {
  Constant c{0.6};
  EXPECT_EQ(roulette(std::vector<double>{1, 1, 2}, c), 2u);
  Constant d{0.2};
  EXPECT_EQ(roulette(std::vector<double>{1, 1, 2}, d), 0u);
  Constant e{0.7};
  EXPECT_EQ(roulette(std::vector<double>{0, 0, 0, 0}, e), 2u);
}

TEST(Invariants, RandomizedSteps) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + draw_index(rng, 10);
    const std::size_t n_imp = 1 + draw_index(rng, n - 1);
    const Bounds box = Bounds::uniform(2, -3, 3);
    std::vector<Country> countries(n);
    for (auto& c : countries) c.position = box.sample(rng), c.cost = sphere(c.position);
    auto empires = form_empires(countries, n_imp, rng);
    for (int step = 0; step < 25; ++step) {
      const std::size_t before = empires.size();
      for (auto& e : empires) {
        assimilate(e, 2.0, rng, box);
        revolve(e, 0.3, rng, box);
        for (auto& c : e.colonies) c.cost = sphere(c.position);
        swap_if_better(e);
        for (const auto& c : e.colonies) ASSERT_GE(c.cost, e.imperialist.cost);
      }
      compete(empires, 0.1, rng);
      ASSERT_EQ(country_count(empires), n);
      ASSERT_LE(empires.size(), before);
      ASSERT_GE(empires.size(), 1u);
    }
  }
}

IcaConfig sphere_config(std::size_t dim, std::uint64_t seed) {
  IcaConfig c;
  c.bounds = Bounds::uniform(dim, -10, 10);
  c.seed = seed;
  return c;
}

TEST(Optimize, SphereConvergence) {
  std::size_t ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) ok += optimize(sphere, sphere_config(4, seed)).best.cost < 1e-2;
  EXPECT_GE(ok, 18u);
}

TEST(Optimize, ZeroDecadesReturnsBestInitial) {
  auto c = sphere_config(3, 5);
  c.max_decades = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& country : initial_countries(c)) best = std::min(best, sphere(country.position));
  const auto r = optimize(sphere, c);
  EXPECT_EQ(r.best.cost, best);
  EXPECT_TRUE(r.history.best_cost.empty());
}

TEST(Optimize, EmpireCountNonIncreasingAndReachesOne) {
  auto c = sphere_config(2, 3);
  c.n_countries = 20;
  c.n_imperialists = 4;
  c.max_decades = 5000;
  const auto r = optimize(sphere, c);
  ASSERT_FALSE(r.history.empire_count.empty());
  for (std::size_t t = 1; t < r.history.empire_count.size(); ++t)
    EXPECT_LE(r.history.empire_count[t], r.history.empire_count[t - 1]);
  EXPECT_EQ(r.history.empire_count.back(), 1u);
  for (std::size_t t = 1; t < r.history.best_cost.size(); ++t)
    EXPECT_LE(r.history.best_cost[t], r.history.best_cost[t - 1]);
}

TEST(Optimize, NonFiniteCostsTolerated) {
  auto c = sphere_config(2, 8);
  c.max_decades = 50;
  const auto r = optimize(
      [](std::span<const double> x) {
        return x[1] < 0 ? std::numeric_limits<double>::infinity() : x[0] * x[0] + x[1] * x[1];
      },
      c);
  EXPECT_TRUE(std::isfinite(r.best.cost));
}

TEST(Optimize, Deterministic) {
  auto c = sphere_config(3, 6);
  c.max_decades = 40;
  const auto a = optimize(sphere, c);
  c.threads = 2;
  const auto b = optimize(sphere, c);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.history.best_cost, b.history.best_cost);
  EXPECT_EQ(a.history.empire_count, b.history.empire_count);
}

TEST(Optimize, InvalidConfig) {
  auto c = sphere_config(2, 1);
  c.n_imperialists = c.n_countries;
  EXPECT_THROW(optimize(sphere, c), InvalidConfigError);
  c = sphere_config(2, 1);
  c.revolution_rate = -0.1;
  EXPECT_THROW(optimize(sphere, c), InvalidConfigError);
  c = sphere_config(2, 1);
  c.assimilation_coeff = 0;
  EXPECT_THROW(optimize(sphere, c), InvalidConfigError);
}

}  // namespace
}  // namespace cropml::ica

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

#include <algorithm>
#include <cmath>
#include <limits>

#include "cropml/hybrid.hpp"

namespace cropml {
namespace {

std::vector<double> vec(const NetworkParams& p) { return {p.values().begin(), p.values().end()}; }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

// Training rows whose yield is an affine function of the attributes.
Dataset linear_dataset(std::uint64_t seed, std::size_t n_per_year) {
  Dataset ds = synthesize(seed, n_per_year, 0.0).filter_crop("wheat");
  for (auto& r : ds.records)
    r.yield = 2.0 + 0.002 * r.at[1] + 0.01 * r.at[2] - 0.05 * r.at[4] + 0.0001 * r.at[0];
  return split_by_year(ds, SplitSpec{}).train;
}

HybridConfig small_config(std::uint64_t seed) {
  HybridConfig c;
  c.seed = seed;
  c.network = {6, 3, 1, 0.1};
  c.gwo.pop_size = 10;
  c.gwo.num_iter = 20;
  c.ica.n_countries = 8;
  c.ica.n_imperialists = 2;
  c.ica.max_decades = 3;
  c.inner = {0.1, 60, 10};
  c.final_training = {0.1, 200, 20};
  return c;
}

TEST(Decode, RoundsAndClamps) {
  EXPECT_EQ(decode_country(std::vector<double>{50.4, 2.6, 1.2, 0.5}), (HyperParams{50, 3, 1, 0.5}));
  EXPECT_EQ(decode_country(std::vector<double>{1.0, 1.0, 1.0, 0.0}), (HyperParams{2, 1, 1, 1e-4}));
  EXPECT_EQ(decode_country(std::vector<double>{150, 9, -3, 7}), (HyperParams{99, 5, 1, 5.0}));
  EXPECT_THROW(decode_country(std::vector<double>{1, 2, 3}), InputShapeError);
}

TEST(Decode, FixedPointOnIntegralVectors) {
  const HyperParams h{17, 4, 2, 0.25};
  EXPECT_EQ(decode_country(h.encode()), h);
  EXPECT_EQ(decode_country(decode_country(h.encode()).encode()), h);
}

TEST(Decode, AnyPointInBoxIsValid) {
  const Bounds box = meta_parameter_bounds();
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) EXPECT_NO_THROW(decode_country(box.sample(rng)).validate());
  EXPECT_EQ(decode_country(box.lower), (HyperParams{2, 1, 1, kMinLearningRate}));
  EXPECT_EQ(decode_country(box.upper), (HyperParams{99, 5, 5, kMaxLearningRate}));
}

TEST(Method, Names) {
  for (Method m : {Method::kAnnIca, Method::kAnnGwo, Method::kBackprop}) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("PSO"), InvalidConfigError);
}

TEST(Config, DigestTracksEveryField) {
  const HybridConfig base;
  EXPECT_EQ(config_digest(base), config_digest(HybridConfig{}));
  HybridConfig c = base;
  c.weight_bound = 4.0;
  EXPECT_NE(config_digest(c), config_digest(base));
  c = base;
  c.ica.revolution_rate = 0.2;
  EXPECT_NE(config_digest(c), config_digest(base));
  c = base;
  c.seed = 1;
  EXPECT_NE(config_digest(c), config_digest(base));
}

TEST(Config, Validation) {
  HybridConfig c;
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), InvalidConfigError);
  c = HybridConfig{};
  c.weight_bound = 0;
  EXPECT_THROW(c.validate(), InvalidConfigError);
  c = HybridConfig{};
  c.network.hidden = 1;
  EXPECT_THROW(c.validate(), InvalidConfigError);
}

TEST(Holdout, LatestYearsHeldOut) {
  const Dataset train = split_by_year(synthesize(1, 5, 0.0), SplitSpec{}).train.filter_crop("barley");
  const auto [fit, val] = holdout_split(train, 0.2);
  EXPECT_EQ(val.size(), 6u);
  EXPECT_EQ(fit.size() + val.size(), train.size());
  int latest_fit = 0;
  for (const auto& r : fit.records) latest_fit = std::max(latest_fit, r.year);
  for (const auto& r : val.records) EXPECT_GE(r.year, latest_fit);
  Dataset two = train.with_records({train.records[0], train.records[1]});
  const auto [f2, v2] = holdout_split(two, 0.9);
  EXPECT_EQ(f2.size(), 1u);
  EXPECT_EQ(v2.size(), 1u);
  EXPECT_THROW(holdout_split(train.with_records({train.records[0]}), 0.2), EmptyInputError);
}

TEST(Fitness, PureAndZeroBudget) {
  const auto data = prepare_training(linear_dataset(2, 6), 0.2);
  const std::vector<double> x{8, 3, 1, 0.3};
  const TrainOptions budget{0.1, 50, 10};
  EXPECT_EQ(ann_ica_fitness(x, data.fit, data.val, budget, 5, 0.5),
            ann_ica_fitness(x, data.fit, data.val, budget, 5, 0.5));
  const double untrained = ann_ica_fitness(x, data.fit, data.val, {0.1, 0, 10}, 5, 0.5);
  const auto start = init_params(decode_country(x).topology(data.fit.n_features), init_seed(5), 0.5);
  EXPECT_EQ(untrained, std::sqrt(mse(start, data.val)));
}

TEST(Fitness, ZeroTargetIsLearnable) {
  auto data = prepare_training(linear_dataset(3, 6), 0.2);
  std::fill(data.fit.targets.begin(), data.fit.targets.end(), 0.0);
  std::fill(data.val.targets.begin(), data.val.targets.end(), 0.0);
  EXPECT_LT(ann_ica_fitness(std::vector<double>{6, 3, 1, 0.2}, data.fit, data.val, {0.1, 500, 50}, 1, 0.5), 0.05);
}

TEST(Fitness, DivergenceIsInfinite) {
  auto data = prepare_training(linear_dataset(3, 6), 0.2);
  for (auto& x : data.fit.inputs) x *= 1e3;
  EXPECT_EQ(ann_ica_fitness(std::vector<double>{20, 1, 1, 5.0}, data.fit, data.val, {5.0, 500, 500}, 1, 0.5),
            std::numeric_limits<double>::infinity());
}

TEST(AnnIca, BeatsRandomMetaParameters) {
  const Dataset train = linear_dataset(4, 10);
  HybridConfig c = small_config(4);
  c.ica.n_countries = 12;
  c.ica.n_imperialists = 3;
  c.ica.max_decades = 5;
  const auto data = prepare_training(train, c.validation_fraction);
  const auto model = train_ann_ica(train, c);
  std::vector<double> random;
  Rng rng(44);
  const Bounds box = meta_parameter_bounds();
  for (int k = 0; k < 10; ++k) {
    const HyperParams h = decode_country(box.sample(rng));
    const auto start = init_params(h.topology(data.fit.n_features), init_seed(c.seed), c.init_scale);
    try {
      const auto r = train_backprop(start, data.fit, data.val, {h.learning_rate, c.final_training.max_epochs,
                                                                c.final_training.patience});
      random.push_back(std::sqrt(mse(r.params, data.val)));
    } catch (const DivergenceError&) {
      random.push_back(std::numeric_limits<double>::infinity());
    }
  }
  EXPECT_LE(std::sqrt(mse(model.params, data.val)), median_of(random));
}

TEST(AnnIca, TopologyMatchesHyperParameters) {
  const Dataset train = linear_dataset(5, 6);
  const auto model = train_ann_ica(train, small_config(5));
  EXPECT_EQ(model.params.topology(), model.hyper.topology(7));
  EXPECT_EQ(model.method, Method::kAnnIca);
  EXPECT_EQ(model.config_digest, config_digest(small_config(5)));
}

TEST(AnnIca, DigestDeterministic) {
  const Dataset train = linear_dataset(6, 6);
  EXPECT_EQ(train_ann_ica(train, small_config(6)).digest(), train_ann_ica(train, small_config(6)).digest());
  EXPECT_NE(train_ann_ica(train, small_config(6)).digest(), train_ann_ica(train, small_config(7)).digest());
}

TEST(AnnIca, ZeroDecadesIsBestInitialCountry) {
  const Dataset train = linear_dataset(7, 6);
  HybridConfig c = small_config(7);
  c.ica.max_decades = 0;
  const auto data = prepare_training(train, c.validation_fraction);
  const auto countries = ica::initial_countries(meta_parameter_ica(c));
  double best = std::numeric_limits<double>::infinity();
  HyperParams chosen;
  for (const auto& country : countries) {
    const double f = ann_ica_fitness(country.position, data.fit, data.val, c.inner, c.seed, c.init_scale);
    if (f < best) best = f, chosen = decode_country(country.position);
  }
  const auto model = train_ann_ica(train, c);
  EXPECT_EQ(model.hyper, chosen);
  EXPECT_EQ(model.phase1_loss, best);
}

TEST(AnnGwo, HandoffIsExact) {
  const Dataset train = linear_dataset(8, 6);
  const HybridConfig c = small_config(8);
  const auto model = train_ann_gwo(train, c);
  EXPECT_EQ(model.phase1_loss, model.history.initial_train_loss);
  const auto data = prepare_training(train, c.validation_fraction);
  const auto topo = c.network.topology(data.fit.n_features);
  const auto best = gwo::optimize(
      [&](std::span<const double> w) { return mse(NetworkParams(topo, {w.begin(), w.end()}), data.fit); },
      weight_space_gwo(c, topo.parameter_count()));
  EXPECT_EQ(best.best.fitness, model.phase1_loss);
}

TEST(AnnGwo, ZeroIterationsIsBackpropFromPackMember) {
  const Dataset train = linear_dataset(9, 6);
  HybridConfig c = small_config(9);
  c.gwo.num_iter = 0;
  const auto model = train_ann_gwo(train, c);
  const auto data = prepare_training(train, c.validation_fraction);
  const auto topo = c.network.topology(data.fit.n_features);
  const auto start = gwo::initial_pack(weight_space_gwo(c, topo.parameter_count())).front().position;
  const auto ref = train_backprop(NetworkParams(topo, start), data.fit, data.val,
                                  {c.network.learning_rate, c.final_training.max_epochs, c.final_training.patience});
  EXPECT_EQ(vec(model.params), vec(ref.params));
  EXPECT_EQ(model.history, ref.history);
}

TEST(IcaWeights, HandoffAndZeroBudget) {
  const Dataset train = linear_dataset(10, 6);
  HybridConfig c = small_config(10);
  c.ica_mode = IcaMode::kWeights;
  const auto model = train_ann_ica(train, c);
  EXPECT_EQ(model.phase1_loss, model.history.initial_train_loss);

  c.ica.max_decades = 0;
  const auto zero = train_ann_ica(train, c);
  const auto data = prepare_training(train, c.validation_fraction);
  const auto topo = c.network.topology(data.fit.n_features);
  auto countries = ica::initial_countries(weight_space_ica(c, topo.parameter_count()));
  const auto best = std::min_element(countries.begin(), countries.end(), [&](const auto& l, const auto& r) {
    return mse(NetworkParams(topo, l.position), data.fit) < mse(NetworkParams(topo, r.position), data.fit);
  });
  const auto ref = train_backprop(NetworkParams(topo, best->position), data.fit, data.val,
                                  {c.network.learning_rate, c.final_training.max_epochs, c.final_training.patience});
  EXPECT_EQ(vec(zero.params), vec(ref.params));
}

TEST(IcaWeights, LinearSurrogateImprovesTenfold) {
  std::size_t ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dataset train = linear_dataset(100 + s, 4);
    HybridConfig c = small_config(s);
    c.ica_mode = IcaMode::kWeights;
    c.network = {4, 1, 1, 0.1};
    c.weight_bound = 1.0;
    c.ica.n_countries = 20;
    c.ica.n_imperialists = 3;
    c.ica.max_decades = 20;
    c.final_training = {0.1, 500, 50};
    const auto data = prepare_training(train, c.validation_fraction);
    const auto topo = c.network.topology(data.fit.n_features);
    double initial = std::numeric_limits<double>::infinity();
    for (const auto& country : ica::initial_countries(weight_space_ica(c, topo.parameter_count())))
      initial = std::min(initial, mse(NetworkParams(topo, country.position), data.fit));
    const auto model = train_ann_ica(train, c);
    ok += mse(model.params, data.fit) * 10 <= initial;
  }
  EXPECT_GE(ok, 18u);
}

TEST(Backprop, ExtraEpochsExtendBudget) {
  const Dataset train = linear_dataset(11, 6);
  HybridConfig c = small_config(11);
  c.final_training = {0.1, 10, 1000};
  EXPECT_EQ(train_backprop_baseline(train, c).history.stopped_epoch, 10u);
  EXPECT_EQ(train_backprop_baseline(train, c, 15).history.stopped_epoch, 25u);
}

TEST(Evaluate, TargetUnits) {
  const Dataset ds = synthesize(12, 6, 0.0).filter_crop("potato");
  const auto split = split_by_year(ds, SplitSpec{});
  const auto model = train_method(Method::kBackprop, split.train, small_config(12));
  const auto pred = predict_yield(model, split.test);
  std::vector<double> y;
  for (const auto& r : split.test.records) y.push_back(r.yield);
  const auto row = evaluate(model, split.test);
  EXPECT_EQ(row.rmse, rmse(y, pred));
  EXPECT_EQ(row.n, split.test.size());
  EXPECT_THROW(evaluate(model, split.test.with_records({})), EmptyInputError);
}

TEST(TrainMethod, Dispatch) {
  const Dataset train = linear_dataset(13, 4);
  const auto c = small_config(13);
  EXPECT_EQ(train_method(Method::kAnnGwo, train, c).method, Method::kAnnGwo);
  EXPECT_EQ(train_method(Method::kBackprop, train, c).method, Method::kBackprop);
}

}  // namespace
}  // namespace cropml

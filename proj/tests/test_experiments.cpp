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
#include <sstream>

#include "cropml/experiments.hpp"

namespace cropml {
namespace {

HybridConfig quick(std::size_t hidden = 6) {
  HybridConfig c;
  c.network = {hidden, 3, 1, 0.1};
  c.gwo.pop_size = 8;
  c.gwo.num_iter = 10;
  c.ica.n_countries = 6;
  c.ica.n_imperialists = 2;
  c.ica.max_decades = 2;
  c.inner = {0.1, 40, 10};
  c.final_training = {0.1, 150, 20};
  return c;
}

ExperimentConfig quick_experiment(std::vector<std::string> crops = {"wheat"}) {
  ExperimentConfig c;
  c.crops = std::move(crops);
  c.methods = {{"ANN-ICA", Method::kAnnIca, quick()}, {"ANN-GWO", Method::kAnnGwo, quick()}};
  c.importance_repeats = 2;
  return c;
}

const Dataset& data() {
  static const Dataset ds = synthesize(21, 6, 0.02);
  return ds;
}

TEST(Median, Values) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), EmptyInputError);
}

TEST(Grades, RankQuartiles) {
  EXPECT_EQ(grade_importances({0.1, 0.7, 0.2, 0.3, 0.4, 0.5, 0.6}), (std::array<int, 7>{0, 3, 0, 1, 1, 2, 2}));
  EXPECT_EQ(grade_importances({1, 1, 1, 1, 1, 1, 1}), (std::array<int, 7>{0, 0, 0, 0, 0, 0, 0}));
  // Ties share the lower rank.
  EXPECT_EQ(grade_importances({0, 0, 0, 5, 5, 9, 9}), (std::array<int, 7>{0, 0, 0, 1, 1, 2, 2}));
}

TEST(Grades, DependOnlyOnOrdering) {
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    std::array<double, 7> imp{};
    for (auto& v : imp) v = rng.uniform(-1, 1);
    auto scaled = imp, warped = imp;
    for (auto& v : scaled) v *= 37.5;
    for (auto& v : warped) v = std::exp(3 * v);
    EXPECT_EQ(grade_importances(imp), grade_importances(scaled));
    EXPECT_EQ(grade_importances(imp), grade_importances(warped));
    for (int g : grade_importances(imp)) EXPECT_TRUE(g >= 0 && g <= 3);
  }
}

TEST(Report, ShapeOneCropTwoMethods) {
  const auto report = run_comparison(quick_experiment(), data());
  ASSERT_EQ(report.rows.size(), 2u);
  ASSERT_EQ(report.averages.size(), 2u);
  std::ostringstream csv;
  write_comparison_csv(report, csv);
  std::size_t lines = 0;
  for (char ch : csv.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 2 + 2);  // header, rows, one average per method
}

TEST(Report, AveragesAreMeans) {
  auto c = quick_experiment({"wheat", "barley", "potato"});
  c.methods.pop_back();
  c.methods.push_back({"BP", Method::kBackprop, quick()});
  const auto report = run_comparison(c, data());
  for (const auto& avg : report.averages) {
    double r = 0, rmse_sum = 0;
    for (const auto& row : report.rows)
      if (row.method == avg.method) r += row.metrics.r, rmse_sum += row.metrics.rmse;
    EXPECT_NEAR(avg.metrics.r, r / 3, 1e-9);
    EXPECT_NEAR(avg.metrics.rmse, rmse_sum / 3, 1e-9);
  }
  for (const auto& crop : report.crops) {
    int r = 0, m = 0, e = 0;
    for (const auto& row : report.rows)
      if (row.crop == crop) r += row.best_r, m += row.best_mae_pct, e += row.best_rmse;
    EXPECT_EQ(r, 1);
    EXPECT_EQ(m, 1);
    EXPECT_EQ(e, 1);
  }
}

TEST(Report, IdenticalMethodsTieToFirst) {
  auto c = quick_experiment();
  c.methods = {{"first", Method::kAnnGwo, quick()}, {"second", Method::kAnnGwo, quick()}};
  const auto report = run_comparison(c, data());
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].metrics.rmse, report.rows[1].metrics.rmse);
  EXPECT_TRUE(report.rows[0].best_r && report.rows[0].best_mae_pct && report.rows[0].best_rmse);
  EXPECT_FALSE(report.rows[1].best_r || report.rows[1].best_mae_pct || report.rows[1].best_rmse);
}

TEST(Report, FailedCropContinues) {
  auto c = quick_experiment({"wheat", "rice"});
  const auto report = run_comparison(c, data());
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_FALSE(report.rows[0].failed);
  EXPECT_TRUE(report.rows[2].failed);
  EXPECT_TRUE(report.any_failed());
  EXPECT_FALSE(report.averages[0].failed);
  std::ostringstream text;
  write_comparison_text(report, text);
  EXPECT_NE(text.str().find("failed: rice"), std::string::npos);
}

TEST(Report, LearnableNoiselessGenerator) {
  ExperimentConfig c;
  c.crops = {"wheat"};
  c.seeds = {1, 2, 3, 4, 5};
  HybridConfig gwo_default;
  c.methods = {{"ANN-GWO", Method::kAnnGwo, gwo_default}, {"BP", Method::kBackprop, HybridConfig{}}};
  const auto report = run_comparison(c, synthesize(3, 20, 0.0));
  double best = 0;
  for (const auto& row : report.rows) best = std::max(best, row.metrics.r);
  EXPECT_GT(best, 0.9);
}

TEST(Report, CsvRoundTrip) {
  const auto report = run_comparison(quick_experiment({"wheat", "barley"}), data());
  std::ostringstream out;
  write_comparison_csv(report, out);
  std::istringstream in(out.str());
  const auto back = read_comparison_csv(in);
  ASSERT_EQ(back.rows.size(), report.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].metrics.r, report.rows[i].metrics.r);
    EXPECT_EQ(back.rows[i].metrics.rmse, report.rows[i].metrics.rmse);
    EXPECT_EQ(back.rows[i].best_rmse, report.rows[i].best_rmse);
  }
  std::istringstream bad("crop,method\n");
  EXPECT_THROW(read_comparison_csv(bad), SchemaError);
}

TEST(PlotData, MatchesReport) {
  ComparisonReport report;
  for (const char* crop : {"wheat", "barley", "potato", "sugar_beet"})
    for (const char* method : {"ANN-ICA", "ANN-GWO"}) {
      ComparisonRow row;
      row.crop = crop;
      row.method = method;
      row.metrics.r = 0.123456789012345 * (1 + report.rows.size());
      report.rows.push_back(row);
    }
  std::ostringstream out;
  EXPECT_EQ(emit_plot_data(report, out), 8u);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kPlotHeader);
  for (const auto& row : report.rows) {
    std::getline(in, line);
    const auto comma = line.rfind(',');
    EXPECT_EQ(std::stod(line.substr(comma + 1)), row.metrics.r);
  }
  std::ostringstream empty;
  EXPECT_EQ(emit_plot_data(ComparisonReport{}, empty), 0u);
  EXPECT_EQ(empty.str(), std::string(kPlotHeader) + "\n");
}

TEST(Attributes, AllSevenGradedPerRow) {
  const auto report = attribute_effects(quick_experiment({"wheat", "potato"}), data());
  ASSERT_EQ(report.rows.size(), 4u);
  std::ostringstream out;
  write_attributes_csv(report, out);
  std::size_t lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 1u + 4 * 7);
  for (const auto& row : report.rows)
    for (int g : row.grade) EXPECT_TRUE(g >= 0 && g <= 3);
}

TEST(Attributes, DeterministicWithSeed) {
  const auto a = attribute_effects(quick_experiment(), data());
  const auto b = attribute_effects(quick_experiment(), data());
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].importance, b.rows[i].importance);
    EXPECT_EQ(a.rows[i].grade, b.rows[i].grade);
  }
}

TEST(Attributes, SingleAttributeIsDegenerate) {
  auto c = quick_experiment();
  c.methods.erase(c.methods.begin());
  c.attributes = {kDominantAttribute};
  const auto report = attribute_effects(c, data());
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].grade, (std::array<int, 7>{}));
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Attributes, UnusedAttributesScoreZero) {
  auto c = quick_experiment();
  c.methods.erase(c.methods.begin());
  c.attributes = {1, 2, 3, 4};
  const auto report = attribute_effects(c, data());
  EXPECT_EQ(report.rows[0].importance[0], 0.0);
  EXPECT_EQ(report.rows[0].importance[5], 0.0);
  EXPECT_EQ(report.rows[0].importance[6], 0.0);
}

TEST(Attributes, RecoversIrrelevantAndDominant) {
  ExperimentConfig c;
  c.crops = {"wheat"};
  c.importance_repeats = 5;
  HybridConfig h = quick(8);
  h.ica.n_countries = 12;
  h.ica.n_imperialists = 3;
  h.ica.max_decades = 6;
  h.inner = {0.1, 150, 15};
  h.final_training = {0.1, 1000, 50};
  c.methods = {{"ANN-ICA", Method::kAnnIca, h}};
  const auto report = attribute_effects(c, synthesize(100, 20, 0.0));
  EXPECT_EQ(report.rows[0].grade[kIrrelevantAttribute], 0);
  EXPECT_EQ(report.rows[0].grade[kDominantAttribute], 3);
}

TEST(SearchPolicy, KeepsUsefulAttributes) {
  auto c = quick_experiment();
  c.methods = {{"BP", Method::kBackprop, quick()}};
  c.attribute_policy = AttributePolicy::kSearch;
  const auto report = run_comparison(c, data());
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_FALSE(report.rows[0].failed);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  auto c = quick_experiment({"wheat", "barley"});
  c.seeds = {1, 2};
  const auto serial = run_experiment(c, data(), true);
  c.threads = 3;
  const auto parallel = run_experiment(c, data(), true);
  std::ostringstream a, b, x, y;
  write_comparison_csv(serial.comparison, a);
  write_comparison_csv(parallel.comparison, b);
  write_attributes_csv(serial.attributes, x);
  write_attributes_csv(parallel.attributes, y);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(x.str(), y.str());
}

TEST(Experiment, ConfigValidation) {
  auto c = quick_experiment();
  c.seeds.clear();
  EXPECT_THROW(c.validate(), InvalidConfigError);
  c = quick_experiment();
  c.methods[1].label = c.methods[0].label;
  EXPECT_THROW(c.validate(), InvalidConfigError);
  c = quick_experiment();
  c.attributes = {9};
  EXPECT_THROW(c.validate(), InvalidConfigError);
}

TEST(Experiment, SynthesizedData) {
  ExperimentConfig c = quick_experiment();
  c.synthesize = {4, 3, 0.0, false};
  EXPECT_EQ(load_experiment_data(c).size(), 4u * 8 * 3);
  c.synthesize.reference_layout = true;
  EXPECT_EQ(load_experiment_data(c).size(), 946u);
}

}  // namespace
}  // namespace cropml

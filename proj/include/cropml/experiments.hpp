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

// Experiment harness: per-crop training of every configured method over a
// list of seeds, test-split accuracy tables, permutation-importance attribute
// grades and per-crop R data for plotting.
//
// Cells (crop, method, seed) are independent and may run on several threads.
// Results are merged by cell index, so reports are identical for any thread
// count.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cropml/data.hpp"
#include "cropml/error.hpp"
#include "cropml/hybrid.hpp"
#include "cropml/metrics.hpp"
#include "cropml/parallel.hpp"
#include "cropml/random.hpp"

namespace cropml {

inline constexpr const char* kVersion = "0.1.0";

struct SynthesizeSpec {
  std::uint64_t seed = 1;
  std::size_t n_per_crop = 20;  // per crop per year; ignored for the reference layout
  double noise_sd = 0.02;
  bool reference_layout = false;
};

enum class AttributePolicy { kFixed, kSearch };

struct MethodEntry {
  std::string label;  // report key; unique within a config
  Method method = Method::kAnnGwo;
  HybridConfig config;
};

struct ExperimentConfig {
  std::optional<std::string> data_path;  // CSV input; synthesize when empty
  SynthesizeSpec synthesize;
  RejectPolicy reject_policy = RejectPolicy::kFail;
  SplitSpec split;
  std::vector<MethodEntry> methods;
  std::vector<std::string> crops;  // empty: every crop in the data
  AttributePolicy attribute_policy = AttributePolicy::kFixed;
  std::vector<std::size_t> attributes = all_attributes();
  std::vector<std::uint64_t> seeds{1};
  std::size_t importance_repeats = 3;
  std::size_t threads = 1;
  std::string out_dir = "results";

  void validate() const {
    if (seeds.empty()) throw InvalidConfigError("seeds: at least one seed is required");
    if (methods.empty()) throw InvalidConfigError("methods: at least one method is required");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      methods[i].config.validate();
      for (std::size_t j = 0; j < i; ++j)
        if (methods[j].label == methods[i].label)
          throw InvalidConfigError("methods: duplicate label '" + methods[i].label + "'");
    }
    if (attributes.empty()) throw InvalidConfigError("attributes.selected: at least one attribute is required");
    for (std::size_t a : attributes)
      if (a >= kNumAttributes) throw InvalidConfigError("attributes.selected: unknown attribute");
    if (importance_repeats < 1) throw InvalidConfigError("importance_repeats must be at least 1");
    split.validate();
  }
};

// ---------------------------------------------------------------------------
// Reports

struct ComparisonRow {
  std::string crop;
  std::string method;
  bool failed = false;
  std::string error;
  MetricsRow metrics;  // medians across seeds
  bool best_r = false;
  bool best_mae_pct = false;
  bool best_rmse = false;
};

struct ComparisonReport {
  std::vector<std::string> crops;    // row order
  std::vector<std::string> methods;  // config order; first wins ties
  std::vector<ComparisonRow> rows;   // crop-major
  std::vector<ComparisonRow> averages;  // one per method, crop field "average"

  bool any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.failed; });
  }
};

struct AttributeRow {
  std::string crop;
  std::string method;
  std::array<double, kNumAttributes> importance{};
  std::array<int, kNumAttributes> grade{};
};

struct AttributeReport {
  std::vector<AttributeRow> rows;
  std::vector<std::string> warnings;
};

inline double median(std::vector<double> values) {
  if (values.empty()) throw EmptyInputError("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Rank-quartile grades: an attribute's rank is the number of attributes with
/// strictly smaller importance (ties share the lower rank), and its grade is
/// floor(4 * rank / 7), so the bottom two ranks map to 0 and the top rank to 3.
inline std::array<int, kNumAttributes> grade_importances(const std::array<double, kNumAttributes>& importance) {
  std::array<int, kNumAttributes> grades{};
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < kNumAttributes; ++j)
      if (importance[j] < importance[i]) ++rank;
    grades[i] = static_cast<int>((4 * rank) / kNumAttributes);
  }
  return grades;
}

/// Sets the best-per-crop flags. Higher R and lower MAE%/RMSE win; ties go to
/// the method listed first.
inline void mark_best(std::vector<ComparisonRow*> group) {
  auto pick = [&](auto better, bool ComparisonRow::*flag) {
    ComparisonRow* best = nullptr;
    for (ComparisonRow* row : group) {
      if (row->failed) continue;
      if (!best || better(*row, *best)) best = row;
    }
    if (best) best->*flag = true;
  };
  pick([](const ComparisonRow& a, const ComparisonRow& b) { return a.metrics.r > b.metrics.r; },
       &ComparisonRow::best_r);
  pick([](const ComparisonRow& a, const ComparisonRow& b) { return a.metrics.mae_pct < b.metrics.mae_pct; },
       &ComparisonRow::best_mae_pct);
  pick([](const ComparisonRow& a, const ComparisonRow& b) { return a.metrics.rmse < b.metrics.rmse; },
       &ComparisonRow::best_rmse);
}

/// Fills per-method averages (arithmetic mean over non-failed crop rows) and
/// the best-per-crop flags.
inline void finalize_report(ComparisonReport& report) {
  report.averages.clear();
  for (const auto& method : report.methods) {
    ComparisonRow avg;
    avg.crop = "average";
    avg.method = method;
    std::size_t count = 0;
    for (const auto& row : report.rows) {
      if (row.method != method || row.failed) continue;
      avg.metrics.r += row.metrics.r;
      avg.metrics.mae_pct += row.metrics.mae_pct;
      avg.metrics.rmse += row.metrics.rmse;
      avg.metrics.n += row.metrics.n;
      ++count;
    }
    if (count == 0) {
      avg.failed = true;
      avg.error = "no successful crops";
    } else {
      avg.metrics.r /= static_cast<double>(count);
      avg.metrics.mae_pct /= static_cast<double>(count);
      avg.metrics.rmse /= static_cast<double>(count);
    }
    report.averages.push_back(avg);
  }
  for (const auto& crop : report.crops) {
    std::vector<ComparisonRow*> group;
    for (auto& row : report.rows)
      if (row.crop == crop) {
        row.best_r = row.best_mae_pct = row.best_rmse = false;
        group.push_back(&row);
      }
    mark_best(group);
  }
}

// ---------------------------------------------------------------------------
// Permutation importance

/// Test-RMSE increase when one attribute column is shuffled across the test
/// records, one value per repetition. Attributes the model does not use get 0.
inline std::array<std::vector<double>, kNumAttributes> permutation_importance(const TrainedModel& model,
                                                                              const Dataset& test,
                                                                              std::size_t repeats,
                                                                              std::uint64_t seed) {
  std::vector<double> targets;
  for (const auto& r : test.records) targets.push_back(r.yield);
  const double base = rmse(targets, predict_yield(model, test));
  std::array<std::vector<double>, kNumAttributes> out;
  for (std::size_t a = 0; a < kNumAttributes; ++a) {
    const bool used =
        std::find(model.normalization.attributes.begin(), model.normalization.attributes.end(), a) !=
        model.normalization.attributes.end();
    for (std::size_t k = 0; k < repeats; ++k) {
      if (!used) {
        out[a].push_back(0.0);
        continue;
      }
      Rng rng(derive_seed(seed, {a, k}));
      std::vector<double> column;
      for (const auto& r : test.records) column.push_back(r.at[a]);
      shuffle_with(rng, column);
      Dataset shuffled = test;
      for (std::size_t i = 0; i < column.size(); ++i) shuffled.records[i].at[a] = column[i];
      out[a].push_back(rmse(targets, predict_yield(model, shuffled)) - base);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running

struct ExperimentResult {
  ComparisonReport comparison;
  AttributeReport attributes;
};

namespace detail {

struct CellOutcome {
  bool failed = false;
  std::string error;
  MetricsRow metrics;
  std::array<std::vector<double>, kNumAttributes> importance;
};

inline std::uint64_t cell_seed(std::uint64_t seed, const std::string& crop) { return derive_seed(seed, {fnv1a(crop)}); }

}  // namespace detail

/// Loads or synthesizes the configured dataset.
inline Dataset load_experiment_data(const ExperimentConfig& config, std::vector<std::string>* warnings = nullptr) {
  if (config.data_path) {
    auto loaded = load_csv(*config.data_path, {config.reject_policy});
    if (warnings) warnings->insert(warnings->end(), loaded.warnings.begin(), loaded.warnings.end());
    return std::move(loaded.dataset);
  }
  const auto& s = config.synthesize;
  if (s.reference_layout) return synthesize_layout(s.seed, reference_layout(), config.split, s.noise_sd);
  return synthesize(s.seed, s.n_per_crop, s.noise_sd);
}

/// Trains every (crop, method, seed) cell once and builds both reports.
/// Importances are only computed when `with_attributes` is set.
inline ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data, bool with_attributes) {
  config.validate();
  Dataset all = data;
  all.attributes = config.attributes;

  ExperimentResult result;
  auto& report = result.comparison;
  report.crops = config.crops.empty() ? all.crops() : config.crops;
  for (const auto& m : config.methods) report.methods.push_back(m.label);

  struct CropData {
    std::optional<SplitResult> split;
    std::string error;
  };
  std::vector<CropData> crop_data(report.crops.size());
  for (std::size_t c = 0; c < report.crops.size(); ++c) {
    try {
      crop_data[c].split = split_by_year(all.filter_crop(report.crops[c]), config.split);
    } catch (const Error& e) {
      crop_data[c].error = e.what();
    }
  }

  const std::size_t n_methods = config.methods.size(), n_seeds = config.seeds.size();
  std::vector<detail::CellOutcome> cells(report.crops.size() * n_methods * n_seeds);
  parallel_for(cells.size(), config.threads, [&](std::size_t index) {
    const std::size_t c = index / (n_methods * n_seeds);
    const std::size_t m = (index / n_seeds) % n_methods;
    const std::size_t s = index % n_seeds;
    auto& cell = cells[index];
    if (!crop_data[c].split) {
      cell.failed = true;
      cell.error = crop_data[c].error;
      return;
    }
    const auto& split = *crop_data[c].split;
    const std::uint64_t seed = detail::cell_seed(config.seeds[s], report.crops[c]);
    auto hybrid = config.methods[m].config;
    hybrid.seed = seed;
    try {
      Dataset train = split.train;
      TrainedModel model = train_method(config.methods[m].method, train, hybrid);
      if (config.attribute_policy == AttributePolicy::kSearch && train.attributes.size() > 1) {
        auto [fit, val] = holdout_split(train, hybrid.validation_fraction);
        const auto imp = permutation_importance(model, val, config.importance_repeats, seed);
        std::vector<std::size_t> keep;
        for (std::size_t a : train.attributes)
          if (median(imp[a]) > 0) keep.push_back(a);
        if (keep.empty()) {
          keep.push_back(*std::max_element(train.attributes.begin(), train.attributes.end(),
                                           [&](std::size_t l, std::size_t r) { return median(imp[l]) < median(imp[r]); }));
        }
        if (keep != train.attributes) {
          train.attributes = keep;
          model = train_method(config.methods[m].method, train, hybrid);
        }
      }
      Dataset test = split.test;
      test.attributes = train.attributes;
      cell.metrics = evaluate(model, test);
      if (with_attributes) cell.importance = permutation_importance(model, test, config.importance_repeats, seed);
    } catch (const Error& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });

  for (std::size_t c = 0; c < report.crops.size(); ++c) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      ComparisonRow row;
      row.crop = report.crops[c];
      row.method = config.methods[m].label;
      std::vector<double> r, mae_pct, err;
      std::array<std::vector<double>, kNumAttributes> pooled;
      bool clamped = false;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& cell = cells[(c * n_methods + m) * n_seeds + s];
        if (cell.failed) {
          row.failed = true;
          row.error = cell.error;
          break;
        }
        r.push_back(cell.metrics.r);
        mae_pct.push_back(cell.metrics.mae_pct);
        err.push_back(cell.metrics.rmse);
        clamped = clamped || cell.metrics.r_clamped;
        row.metrics.n = cell.metrics.n;
        for (std::size_t a = 0; a < kNumAttributes; ++a)
          pooled[a].insert(pooled[a].end(), cell.importance[a].begin(), cell.importance[a].end());
      }
      if (!row.failed) {
        row.metrics.r = median(r);
        row.metrics.mae_pct = median(mae_pct);
        row.metrics.rmse = median(err);
        row.metrics.r_clamped = clamped;
        if (with_attributes) {
          AttributeRow attr{row.crop, row.method, {}, {}};
          for (std::size_t a = 0; a < kNumAttributes; ++a) attr.importance[a] = median(pooled[a]);
          if (config.attributes.size() <= 1) {
            result.attributes.warnings.push_back(row.crop + "/" + row.method +
                                                 ": single-attribute model, every grade set to 0");
          } else {
            attr.grade = grade_importances(attr.importance);
          }
          result.attributes.rows.push_back(attr);
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  finalize_report(report);
  return result;
}

inline ComparisonReport run_comparison(const ExperimentConfig& config, const Dataset& data) {
  return run_experiment(config, data, false).comparison;
}

inline AttributeReport attribute_effects(const ExperimentConfig& config, const Dataset& data) {
  return run_experiment(config, data, true).attributes;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

/// Shortest text that reads back to the same double.
inline std::string exact(double v) { return format_number(v); }

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

inline constexpr const char* kComparisonHeader = "crop,method,status,r,mae_pct,rmse,n,best_r,best_mae_pct,best_rmse";

inline void write_comparison_csv(const ComparisonReport& report, std::ostream& out) {
  out << kComparisonHeader << '\n';
  auto emit = [&](const ComparisonRow& row) {
    out << row.crop << ',' << row.method << ',' << (row.failed ? "failed" : "ok") << ','
        << detail::exact(row.metrics.r) << ',' << detail::exact(row.metrics.mae_pct) << ','
        << detail::exact(row.metrics.rmse) << ',' << row.metrics.n << ',' << row.best_r << ',' << row.best_mae_pct
        << ',' << row.best_rmse << '\n';
  };
  for (const auto& row : report.rows) emit(row);
  for (const auto& row : report.averages) emit(row);
}

/// Aligned text: one line per crop, columns grouped by metric then method.
inline void write_comparison_text(const ComparisonReport& report, std::ostream& out) {
  char buf[256];
  out << "Accuracy on the test years (medians across seeds; * = best per crop)\n\n";
  std::snprintf(buf, sizeof buf, "%-12s", "");
  out << buf;
  for (const char* metric : {"R", "MAE (%)", "RMSE"})
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      std::snprintf(buf, sizeof buf, " %12s", metric);
      out << buf;
    }
  out << '\n';
  std::snprintf(buf, sizeof buf, "%-12s", "crop");
  out << buf;
  for (int group = 0; group < 3; ++group)
    for (const auto& method : report.methods) {
      std::snprintf(buf, sizeof buf, " %12s", method.substr(0, 12).c_str());
      out << buf;
    }
  out << '\n';

  auto cell = [&](const ComparisonRow* row, double value, bool best) {
    if (!row || row->failed)
      std::snprintf(buf, sizeof buf, " %12s", "failed");
    else
      std::snprintf(buf, sizeof buf, " %11.4f%c", value, best ? '*' : ' ');
    out << buf;
  };
  auto emit_line = [&](const std::string& crop, const std::vector<const ComparisonRow*>& rows) {
    std::snprintf(buf, sizeof buf, "%-12s", crop.substr(0, 12).c_str());
    out << buf;
    for (const auto* row : rows) cell(row, row ? row->metrics.r : 0, row && row->best_r);
    for (const auto* row : rows) cell(row, row ? row->metrics.mae_pct : 0, row && row->best_mae_pct);
    for (const auto* row : rows) cell(row, row ? row->metrics.rmse : 0, row && row->best_rmse);
    out << '\n';
  };
  for (const auto& crop : report.crops) {
    std::vector<const ComparisonRow*> rows;
    for (const auto& method : report.methods) {
      const ComparisonRow* found = nullptr;
      for (const auto& row : report.rows)
        if (row.crop == crop && row.method == method) found = &row;
      rows.push_back(found);
    }
    emit_line(crop, rows);
  }
  std::vector<const ComparisonRow*> averages;
  for (const auto& row : report.averages) averages.push_back(&row);
  emit_line("average", averages);

  out << "\nR = sqrt(1 - sum((A-P)^2) / sum(A^2)), clamped at 0. MAE (%) is relative to the mean target.\n"
         "RMSE is in target units (t/ha). Ties for best go to the method listed first.\n";
  for (const auto& row : report.rows)
    if (row.failed) out << "failed: " << row.crop << "/" << row.method << ": " << row.error << '\n';
}

inline constexpr const char* kAttributesHeader = "crop,method,attribute,importance,grade";

inline void write_attributes_csv(const AttributeReport& report, std::ostream& out) {
  out << kAttributesHeader << '\n';
  for (const auto& row : report.rows)
    for (std::size_t a = 0; a < kNumAttributes; ++a)
      out << row.crop << ',' << row.method << ',' << attribute_code(a) << ',' << detail::exact(row.importance[a])
          << ',' << row.grade[a] << '\n';
}

inline constexpr const char* kPlotHeader = "crop,method,r";

/// One line per successful (crop, method) row: the R value of the report.
/// Returns the number of data lines written.
inline std::size_t emit_plot_data(const ComparisonReport& report, std::ostream& out) {
  out << kPlotHeader << '\n';
  std::size_t lines = 0;
  for (const auto& row : report.rows) {
    if (row.failed) continue;
    out << row.crop << ',' << row.method << ',' << detail::exact(row.metrics.r) << '\n';
    ++lines;
  }
  return lines;
}

/// Reads a comparison.csv back into a report (flags and averages included).
inline ComparisonReport read_comparison_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kComparisonHeader)
    throw SchemaError("comparison file must start with '" + std::string(kComparisonHeader) + "'");
  ComparisonReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != 10) throw RowError(line_no, "expected 10 cells");
    ComparisonRow row;
    row.crop = std::string(cells[0]);
    row.method = std::string(cells[1]);
    row.failed = cells[2] == "failed";
    int flags[3] = {0, 0, 0};
    if (!detail::parse_number(cells[3], row.metrics.r) || !detail::parse_number(cells[4], row.metrics.mae_pct) ||
        !detail::parse_number(cells[5], row.metrics.rmse) || !detail::parse_number(cells[6], row.metrics.n) ||
        !detail::parse_number(cells[7], flags[0]) || !detail::parse_number(cells[8], flags[1]) ||
        !detail::parse_number(cells[9], flags[2]))
      throw RowError(line_no, "unparseable value");
    row.best_r = flags[0];
    row.best_mae_pct = flags[1];
    row.best_rmse = flags[2];
    if (row.crop == "average") {
      report.averages.push_back(row);
      continue;
    }
    if (std::find(report.crops.begin(), report.crops.end(), row.crop) == report.crops.end())
      report.crops.push_back(row.crop);
    if (std::find(report.methods.begin(), report.methods.end(), row.method) == report.methods.end())
      report.methods.push_back(row.method);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace cropml

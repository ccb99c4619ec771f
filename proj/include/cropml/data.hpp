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

// Crop-yield records, CSV ingestion, year-based splitting, min-max scaling
// and a synthetic generator with a known ground-truth yield function.
//
// CSV format: header `crop,year,at1,at2,at3,at4,at5,at6,at7,yield`, one record
// per line, '.' decimal separator.
//   at1 planting area (ha)            at2 irrigation water depth (mm)
//   at3 rainfall in growth stages (mm) at4 global solar radiation (kWh m^-2)
//   at5/at6/at7 max/average/min temperature (deg C)
//   yield (t ha^-1)

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "cropml/ann.hpp"
#include "cropml/error.hpp"
#include "cropml/random.hpp"

namespace cropml {

inline constexpr std::size_t kNumAttributes = 7;

/// "AT1".."AT7" for attribute indices 0..6.
inline std::string attribute_code(std::size_t index) { return "AT" + std::to_string(index + 1); }

enum class CropKind { kWheat, kBarley, kPotato, kSugarBeet, kOther };

struct Crop {
  CropKind kind = CropKind::kWheat;
  std::string other_label;  // only for kOther

  static Crop parse(std::string_view name) {
    if (name == "wheat") return {CropKind::kWheat, {}};
    if (name == "barley") return {CropKind::kBarley, {}};
    if (name == "potato") return {CropKind::kPotato, {}};
    if (name == "sugar_beet") return {CropKind::kSugarBeet, {}};
    return {CropKind::kOther, std::string(name)};
  }

  std::string name() const {
    switch (kind) {
      case CropKind::kWheat: return "wheat";
      case CropKind::kBarley: return "barley";
      case CropKind::kPotato: return "potato";
      case CropKind::kSugarBeet: return "sugar_beet";
      case CropKind::kOther: return other_label;
    }
    return other_label;
  }

  bool operator==(const Crop&) const = default;
};

struct CropRecord {
  Crop crop;
  int year = 0;
  std::array<double, kNumAttributes> at{};
  double yield = 0;

  bool operator==(const CropRecord&) const = default;
};

/// First violated record invariant, if any.
inline std::optional<std::string> record_violation(const CropRecord& r) {
  for (double v : r.at)
    if (!std::isfinite(v)) return "non-finite attribute";
  if (!std::isfinite(r.yield)) return "non-finite yield";
  if (!(r.at[0] > 0)) return "planting area must be positive";
  if (r.at[1] < 0 || r.at[2] < 0 || r.at[3] < 0) return "irrigation, rainfall and radiation must be non-negative";
  if (!(r.at[6] <= r.at[5] && r.at[5] <= r.at[4])) return "temperature ordering violated (need min <= avg <= max)";
  if (r.yield < 0) return "yield must be non-negative";
  return std::nullopt;
}

inline std::vector<std::size_t> all_attributes() {
  std::vector<std::size_t> a(kNumAttributes);
  for (std::size_t k = 0; k < kNumAttributes; ++k) a[k] = k;
  return a;
}

/// Min-max scaling statistics for the selected attributes and the target.
struct NormalizationStats {
  std::vector<std::size_t> attributes;
  std::vector<double> min;
  std::vector<double> max;
  double target_min = 0;
  double target_max = 1;

  double scale_feature(std::size_t column, double x) const {
    return (x - min[column]) / (max[column] - min[column]);
  }
  double scale_target(double y) const { return (y - target_min) / (target_max - target_min); }
  double unscale_target(double y) const { return target_min + y * (target_max - target_min); }

  bool operator==(const NormalizationStats&) const = default;
};

inline double denormalize(double value, const NormalizationStats& stats) { return stats.unscale_target(value); }

struct Dataset {
  std::vector<CropRecord> records;
  std::vector<std::size_t> attributes = all_attributes();
  std::optional<NormalizationStats> normalization;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  Dataset with_records(std::vector<CropRecord> rs) const {
    Dataset out;
    out.records = std::move(rs);
    out.attributes = attributes;
    out.normalization = normalization;
    return out;
  }

  Dataset filter_crop(const std::string& crop) const {
    std::vector<CropRecord> rs;
    for (const auto& r : records)
      if (r.crop.name() == crop) rs.push_back(r);
    return with_records(std::move(rs));
  }

  /// Crop names in first-appearance order.
  std::vector<std::string> crops() const {
    std::vector<std::string> names;
    for (const auto& r : records)
      if (std::find(names.begin(), names.end(), r.crop.name()) == names.end()) names.push_back(r.crop.name());
    return names;
  }
};

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::array<std::string_view, 10> kCsvColumns = {"crop", "year", "at1", "at2", "at3",
                                                                 "at4",  "at5",  "at6", "at7", "yield"};

enum class RejectPolicy { kFail, kSkip };

struct LoadOptions {
  RejectPolicy policy = RejectPolicy::kFail;
};

struct LoadResult {
  Dataset dataset;
  std::vector<std::string> warnings;  // one per skipped row
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

template <typename T>
bool parse_number(std::string_view cell, T& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Parses CSV text. Rows that fail to parse always raise RowError; rows that
/// parse but break a record invariant raise RowError under kFail and are
/// dropped with a warning under kSkip.
inline LoadResult parse_csv(std::istream& in, const LoadOptions& options = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw SchemaError("missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = detail::split_commas(line);
  std::array<std::size_t, kCsvColumns.size()> index{};
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kCsvColumns[c]);
    if (it == header.end()) throw SchemaError("missing column '" + std::string(kCsvColumns[c]) + "'");
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  LoadResult result;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != header.size())
      throw RowError(line_no, "expected " + std::to_string(header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    CropRecord record;
    const auto crop_cell = cells[index[0]];
    if (crop_cell.empty()) throw RowError(line_no, "empty crop name");
    record.crop = Crop::parse(crop_cell);
    if (!detail::parse_number(cells[index[1]], record.year))
      throw RowError(line_no, "unparseable year '" + std::string(cells[index[1]]) + "'");
    for (std::size_t k = 0; k < kNumAttributes; ++k)
      if (!detail::parse_number(cells[index[2 + k]], record.at[k]))
        throw RowError(line_no, "unparseable at" + std::to_string(k + 1) + " '" + std::string(cells[index[2 + k]]) +
                                    "'");
    if (!detail::parse_number(cells[index[9]], record.yield))
      throw RowError(line_no, "unparseable yield '" + std::string(cells[index[9]]) + "'");

    if (auto violation = record_violation(record)) {
      if (options.policy == RejectPolicy::kFail) throw RowError(line_no, *violation);
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + *violation + " (row skipped)");
      continue;
    }
    result.dataset.records.push_back(std::move(record));
  }
  return result;
}

inline LoadResult load_csv(const std::string& path, const LoadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_csv(in, options);
}

/// Shortest round-trip decimal form, so a reload reproduces every value.
inline void write_csv(const Dataset& ds, std::ostream& out) {
  for (std::size_t c = 0; c < kCsvColumns.size(); ++c) out << (c ? "," : "") << kCsvColumns[c];
  out << '\n';
  for (const auto& r : ds.records) {
    out << r.crop.name() << ',' << r.year;
    for (double v : r.at) out << ',' << detail::format_number(v);
    out << ',' << detail::format_number(r.yield) << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(ds, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Splitting

struct YearRange {
  int first = 0;
  int last = 0;

  bool contains(int year) const noexcept { return year >= first && year <= last; }
  std::string to_string() const { return std::to_string(first) + "-" + std::to_string(last); }
  bool operator==(const YearRange&) const = default;
};

struct SplitSpec {
  YearRange train{1999, 2004};
  YearRange test{2005, 2006};

  void validate() const {
    if (train.first > train.last || test.first > test.last) throw InvalidConfigError("year range with first > last");
    if (train.first <= test.last && test.first <= train.last)
      throw InvalidConfigError("train and test year ranges overlap");
  }
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::size_t dropped = 0;  // records outside both ranges
};

inline SplitResult split_by_year(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  std::vector<CropRecord> train, test;
  std::size_t dropped = 0;
  for (const auto& r : ds.records) {
    if (spec.train.contains(r.year))
      train.push_back(r);
    else if (spec.test.contains(r.year))
      test.push_back(r);
    else
      ++dropped;
  }
  if (train.empty()) throw SplitError("no records in training years " + spec.train.to_string());
  if (test.empty()) throw SplitError("no records in testing years " + spec.test.to_string());
  return {ds.with_records(std::move(train)), ds.with_records(std::move(test)), dropped};
}

// ---------------------------------------------------------------------------
// Normalization

/// Fits min-max statistics on `ds` for its selected attributes and the yield.
inline NormalizationStats fit_normalization(const Dataset& ds) {
  if (ds.empty()) throw EmptyInputError("cannot fit normalization on an empty dataset");
  if (ds.attributes.empty()) throw InvalidConfigError("no attributes selected");
  NormalizationStats stats;
  stats.attributes = ds.attributes;
  for (std::size_t a : ds.attributes) {
    double lo = ds.records.front().at[a], hi = lo;
    for (const auto& r : ds.records) {
      lo = std::min(lo, r.at[a]);
      hi = std::max(hi, r.at[a]);
    }
    if (!(lo < hi)) throw ConstantColumnError("attribute " + attribute_code(a) + " is constant");
    stats.min.push_back(lo);
    stats.max.push_back(hi);
  }
  stats.target_min = stats.target_max = ds.records.front().yield;
  for (const auto& r : ds.records) {
    stats.target_min = std::min(stats.target_min, r.yield);
    stats.target_max = std::max(stats.target_max, r.yield);
  }
  if (!(stats.target_min < stats.target_max)) throw ConstantColumnError("yield is constant");
  return stats;
}

/// Copy of `ds` carrying statistics fitted on `ds` itself.
inline std::pair<Dataset, NormalizationStats> normalize(const Dataset& ds) {
  auto stats = fit_normalization(ds);
  Dataset out = ds;
  out.normalization = stats;
  return {std::move(out), std::move(stats)};
}

/// Copy of `ds` carrying externally fitted statistics (no refit, no clamping).
inline Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats) {
  Dataset out = ds;
  out.attributes = stats.attributes;
  out.normalization = stats;
  return out;
}

/// Network-ready samples. Scaled when `ds` carries statistics, raw otherwise.
inline Samples to_samples(const Dataset& ds) {
  Samples s;
  s.n_features = ds.attributes.size();
  s.inputs.reserve(ds.size() * s.n_features);
  s.targets.reserve(ds.size());
  const auto& stats = ds.normalization;
  for (const auto& r : ds.records) {
    for (std::size_t c = 0; c < ds.attributes.size(); ++c) {
      const double x = r.at[ds.attributes[c]];
      s.inputs.push_back(stats ? stats->scale_feature(c, x) : x);
    }
    s.targets.push_back(stats ? stats->scale_target(r.yield) : r.yield);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Mean yield level of each crop in t ha^-1.
inline double base_yield(const Crop& crop) {
  switch (crop.kind) {
    case CropKind::kWheat: return 5.0;
    case CropKind::kBarley: return 4.0;
    case CropKind::kPotato: return 30.0;
    case CropKind::kSugarBeet: return 50.0;
    case CropKind::kOther: return 10.0;
  }
  return 10.0;
}

/// Noise-free yield of the generator. Depends on irrigation (dominant,
/// saturating), rainfall, radiation and maximum temperature only; planting
/// area and the average/minimum temperatures have no direct effect.
///
///   w = (at2 - 300)/600, r = (at3 - 50)/200, s = (at4 - 4)/3, h = (at5 - 25)/13
///   yield = base * (0.35 + 0.9 (1 - e^{-3w}) + 0.15 sin(pi r) + 0.12 s - 0.15 h^2)
inline double generator_yield(const Crop& crop, const std::array<double, kNumAttributes>& at) {
  const double w = (at[1] - 300.0) / 600.0;
  const double r = (at[2] - 50.0) / 200.0;
  const double s = (at[3] - 4.0) / 3.0;
  const double h = (at[4] - 25.0) / 13.0;
  return base_yield(crop) *
         (0.35 + 0.9 * (1.0 - std::exp(-3.0 * w)) + 0.15 * std::sin(std::numbers::pi * r) + 0.12 * s - 0.15 * h * h);
}

/// Attribute the generator depends on most strongly (AT2).
inline constexpr std::size_t kDominantAttribute = 1;
/// Attribute independent of everything else in the generator (AT1).
inline constexpr std::size_t kIrrelevantAttribute = 0;

/// One synthetic record. Noise is Gaussian with standard deviation
/// noise_sd * base_yield(crop); the yield is floored at zero.
template <typename Generator>
CropRecord synthesize_record(Generator& rng, const Crop& crop, int year, double noise_sd) {
  CropRecord r;
  r.crop = crop;
  r.year = year;
  r.at[0] = rng.uniform(50.0, 5000.0);
  r.at[1] = rng.uniform(300.0, 900.0);
  r.at[2] = rng.uniform(50.0, 250.0);
  r.at[3] = rng.uniform(4.0, 7.0);
  r.at[4] = rng.uniform(25.0, 38.0);
  r.at[6] = r.at[4] - rng.uniform(12.0, 18.0);
  r.at[5] = std::clamp(0.5 * (r.at[4] + r.at[6]) + rng.uniform(-1.0, 1.0), r.at[6], r.at[4]);
  r.yield = generator_yield(crop, r.at);
  if (noise_sd > 0) r.yield = std::max(0.0, r.yield + rng.normal(0.0, noise_sd * base_yield(crop)));
  return r;
}

inline const std::array<Crop, 4>& standard_crops() {
  static const std::array<Crop, 4> crops = {Crop{CropKind::kWheat, {}}, Crop{CropKind::kBarley, {}},
                                            Crop{CropKind::kPotato, {}}, Crop{CropKind::kSugarBeet, {}}};
  return crops;
}

inline constexpr int kFirstYear = 1999;
inline constexpr int kLastYear = 2006;

/// n_per_crop records for each of the four crops in each year 1999-2006.
inline Dataset synthesize(std::uint64_t seed, std::size_t n_per_crop, double noise_sd) {
  if (n_per_crop < 1) throw InvalidConfigError("n_per_crop must be at least 1");
  if (noise_sd < 0) throw InvalidConfigError("noise_sd must be non-negative");
  Rng rng(seed);
  Dataset ds;
  for (const auto& crop : standard_crops())
    for (int year = kFirstYear; year <= kLastYear; ++year)
      for (std::size_t i = 0; i < n_per_crop; ++i) ds.records.push_back(synthesize_record(rng, crop, year, noise_sd));
  return ds;
}

struct CropCounts {
  Crop crop;
  std::size_t train = 0;
  std::size_t test = 0;
};

/// Per-crop sample counts of the reference study (1999-2004 train, 2005-2006 test).
inline std::vector<CropCounts> reference_layout() {
  const auto& c = standard_crops();
  return {{c[0], 449, 59}, {c[1], 42, 45}, {c[2], 132, 63}, {c[3], 108, 48}};
}

/// Synthetic records with exact per-crop train/test counts, spread as evenly
/// as possible over the years of each range (earlier years take the remainder).
inline Dataset synthesize_layout(std::uint64_t seed, const std::vector<CropCounts>& layout, const SplitSpec& spec,
                                 double noise_sd) {
  spec.validate();
  if (noise_sd < 0) throw InvalidConfigError("noise_sd must be non-negative");
  Rng rng(seed);
  Dataset ds;
  auto fill = [&](const Crop& crop, const YearRange& years, std::size_t count) {
    const auto n_years = static_cast<std::size_t>(years.last - years.first + 1);
    for (std::size_t y = 0; y < n_years; ++y) {
      const std::size_t here = count / n_years + (y < count % n_years ? 1 : 0);
      for (std::size_t i = 0; i < here; ++i)
        ds.records.push_back(synthesize_record(rng, crop, years.first + static_cast<int>(y), noise_sd));
    }
  };
  for (const auto& entry : layout) {
    fill(entry.crop, spec.train, entry.train);
    fill(entry.crop, spec.test, entry.test);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Summary

struct SummaryRow {
  std::string crop;
  std::size_t total = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  double test_pct = 0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;  // per crop, first-appearance order
  SummaryRow totals;
};

/// Per-crop record counts; total counts every record of the crop and the
/// testing percentage is 100 * test / total.
inline SummaryTable summarize(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  SummaryTable table;
  for (const auto& name : ds.crops()) table.rows.push_back({name, 0, 0, 0, 0});
  table.totals.crop = "total";
  for (const auto& r : ds.records) {
    auto& row = *std::find_if(table.rows.begin(), table.rows.end(),
                              [&](const SummaryRow& s) { return s.crop == r.crop.name(); });
    for (SummaryRow* target : {&row, &table.totals}) {
      ++target->total;
      if (spec.train.contains(r.year)) ++target->train;
      if (spec.test.contains(r.year)) ++target->test;
    }
  }
  auto pct = [](const SummaryRow& r) { return r.total ? 100.0 * static_cast<double>(r.test) / r.total : 0.0; };
  for (auto& row : table.rows) row.test_pct = pct(row);
  table.totals.test_pct = pct(table.totals);
  return table;
}

inline void write_summary(const SummaryTable& table, const SplitSpec& spec, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# train years %s, test years %s\n", spec.train.to_string().c_str(),
                spec.test.to_string().c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "%-12s %8s %8s %8s %10s\n", "crop", "total", "train", "test", "test_pct");
  out << buf;
  auto emit = [&](const SummaryRow& r) {
    std::snprintf(buf, sizeof buf, "%-12s %8zu %8zu %8zu %10.2f\n", r.crop.c_str(), r.total, r.train, r.test,
                  r.test_pct);
    out << buf;
  };
  for (const auto& r : table.rows) emit(r);
  emit(table.totals);
}

}  // namespace cropml

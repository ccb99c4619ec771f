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

// Command-line front end. Subcommands:
//   synthesize  write a synthetic dataset CSV
//   summarize   per-crop train/test counts of a dataset
//   compare     train every method per crop, write all reports
//   attributes  attribute-effect report only
//   plot-data   per-crop R data from an existing comparison.csv
//
// Exit codes: 0 success, 1 invalid config or input, 2 usage error,
// 3 run finished with failed rows.

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cropml/config.hpp"
#include "cropml/data.hpp"
#include "cropml/experiments.hpp"

namespace cropml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailedRows = 3;

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

struct RunOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> crops;
  std::optional<std::string> methods;
  std::optional<std::size_t> threads;
};

inline ExperimentConfig resolve_config(const RunOverrides& o) {
  ExperimentConfig config = load_experiment_config(o.config_path);
  if (o.seed) config.seeds = {*o.seed};
  if (o.out) config.out_dir = *o.out;
  if (o.crops) config.crops = split_list(*o.crops);
  if (o.threads) config.threads = *o.threads;
  if (o.methods) {
    const auto wanted = split_list(*o.methods);
    std::vector<MethodEntry> kept;
    for (const auto& entry : config.methods)
      for (const auto& w : wanted)
        if (entry.label == w || method_name(entry.method) == w) {
          kept.push_back(entry);
          break;
        }
    if (kept.empty()) throw ConfigError("--method", "no configured method matches '" + *o.methods + "'");
    config.methods = std::move(kept);
  }
  if (config.data_path && !std::filesystem::exists(*config.data_path))
    throw ConfigError("data.path", "file '" + *config.data_path + "' does not exist");
  config.validate();
  return config;
}

inline std::string data_digest(const Dataset& ds) {
  std::ostringstream csv;
  write_csv(ds, csv);
  return hex_digest(fnv1a(csv.str()));
}

inline void write_manifest(const std::filesystem::path& path, const std::string& command,
                           const ExperimentConfig& config, const Dataset& data) {
  const auto resolved = to_json(config).dump(2);
  auto out = detail::open_output(path);
  out << "cropml " << kVersion << '\n';
  out << "command: " << command << '\n';
  out << "config_digest: " << hex_digest(fnv1a(resolved)) << '\n';
  out << "data_digest: " << data_digest(data) << '\n';
  out << "seeds:";
  for (auto s : config.seeds) out << ' ' << s;
  out << '\n';
  for (const auto& m : config.methods) out << "method " << m.label << ": " << config_digest(m.config) << '\n';
  out << "rerun: cropml " << command << " --config <file holding the resolved config below>\n";
  out << "resolved_config:\n" << resolved << '\n';
  detail::close_output(out, path);
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  auto out = detail::open_output(path);
  writer(out);
  detail::close_output(out, path);
}

inline int run_experiment_command(const std::string& command, const RunOverrides& overrides) {
  const ExperimentConfig config = resolve_config(overrides);
  std::vector<std::string> warnings;
  const Dataset data = load_experiment_data(config, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  const bool full = command == "compare";
  const auto result = run_experiment(config, data, true);
  const std::filesystem::path dir(config.out_dir);
  if (full) {
    write_file(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(result.comparison, o); });
    write_file(dir / "comparison.txt", [&](std::ostream& o) { write_comparison_text(result.comparison, o); });
    write_file(dir / "fig2_data.csv", [&](std::ostream& o) { emit_plot_data(result.comparison, o); });
  }
  write_file(dir / "attributes.csv", [&](std::ostream& o) { write_attributes_csv(result.attributes, o); });
  write_manifest(dir / "manifest.txt", command, config, data);
  for (const auto& w : result.attributes.warnings) std::cerr << "warning: " << w << '\n';

  std::size_t failed = 0;
  for (const auto& row : result.comparison.rows) {
    if (!row.failed) continue;
    ++failed;
    std::cerr << "error: " << row.crop << "/" << row.method << ": " << row.error << '\n';
  }
  std::cout << "summary command=" << command << " crops=" << result.comparison.crops.size()
            << " methods=" << result.comparison.methods.size() << " seeds=" << config.seeds.size()
            << " rows=" << result.comparison.rows.size() << " failed=" << failed << " config_digest="
            << hex_digest(fnv1a(to_json(config).dump(2))) << " out=" << dir.string() << '\n';
  return failed ? kExitFailedRows : kExitOk;
}

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Hybrid ANN-ICA / ANN-GWO crop-yield experiments"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synthesize", "Write a synthetic dataset CSV");
  std::uint64_t synth_seed = 1;
  std::size_t n_per_crop = 20;
  double noise_sd = 0.02;
  bool reference = false;
  std::string synth_out;
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--n-per-crop", n_per_crop, "Records per crop per year");
  synth->add_option("--noise", noise_sd, "Noise standard deviation as a fraction of the crop's base yield");
  synth->add_flag("--reference-layout", reference, "Use the reference per-crop train/test counts instead");

  auto* summ = app.add_subcommand("summarize", "Per-crop train/test counts");
  std::string summ_data;
  std::vector<int> train_years{1999, 2004}, test_years{2005, 2006};
  summ->add_option("--data", summ_data, "Dataset CSV")->required();
  summ->add_option("--train-years", train_years, "First and last training year")->expected(2);
  summ->add_option("--test-years", test_years, "First and last testing year")->expected(2);

  RunOverrides overrides;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", overrides.config_path, "JSON experiment config")->required();
    sub->add_option("--seed", overrides.seed, "Run a single seed instead of the configured list");
    sub->add_option("--out", overrides.out, "Output directory");
    sub->add_option("--crops", overrides.crops, "Comma-separated crops to include");
    sub->add_option("--method", overrides.methods, "Comma-separated method labels or names to run");
    sub->add_option("--threads", overrides.threads, "Worker threads");
  };
  auto* compare = app.add_subcommand("compare", "Train all methods and write every report");
  add_run_options(compare);
  auto* attributes = app.add_subcommand("attributes", "Write the attribute-effect report");
  add_run_options(attributes);

  auto* plot = app.add_subcommand("plot-data", "Per-crop R data from a comparison.csv");
  std::string report_path, plot_out;
  plot->add_option("--report", report_path, "comparison.csv to read")->required();
  plot->add_option("--out", plot_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      const Dataset ds = reference ? synthesize_layout(synth_seed, reference_layout(), SplitSpec{}, noise_sd)
                                   : synthesize(synth_seed, n_per_crop, noise_sd);
      save_csv(ds, synth_out);
      std::cout << "summary command=synthesize records=" << ds.size() << " digest=" << data_digest(ds)
                << " out=" << synth_out << '\n';
      return kExitOk;
    }
    if (*summ) {
      const auto loaded = load_csv(summ_data);
      SplitSpec spec{{train_years[0], train_years[1]}, {test_years[0], test_years[1]}};
      write_summary(summarize(loaded.dataset, spec), spec, std::cout);
      return kExitOk;
    }
    if (*compare) return run_experiment_command("compare", overrides);
    if (*attributes) return run_experiment_command("attributes", overrides);
    if (*plot) {
      std::ifstream in(report_path);
      if (!in) throw IoError("cannot open '" + report_path + "'");
      const auto report = read_comparison_csv(in);
      std::size_t lines = 0;
      write_file(plot_out, [&](std::ostream& o) { lines = emit_plot_data(report, o); });
      if (lines == 0) std::cerr << "warning: report has no rows; wrote header only\n";
      std::cout << "summary command=plot-data lines=" << lines << " out=" << plot_out << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitUsage;
}

}  // namespace cropml::cli

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

// JSON experiment configuration. Every key is optional; absent keys keep
// their defaults and unknown keys are rejected. Example:
//
//   {
//     "data": {"synthesize": {"seed": 1, "n_per_crop": 20, "noise_sd": 0.02,
//                             "layout": "uniform"}},
//     "split": {"train_years": [1999, 2004], "test_years": [2005, 2006]},
//     "crops": ["wheat"],
//     "attributes": {"policy": "fixed", "selected": ["AT1", "AT2"]},
//     "seeds": [1, 2, 3],
//     "importance_repeats": 3,
//     "threads": 1,
//     "out": "results",
//     "methods": [
//       {"label": "ANN-ICA", "method": "ANN-ICA", "config": {"ica": {"max_decades": 10}}},
//       {"label": "ANN-GWO", "method": "ANN-GWO", "config": {"gwo": {"num_iter": 100}}}
//     ]
//   }
//
// Method config keys: gwo.{pop_size,num_iter}; ica.{n_countries,
// n_imperialists, assimilation_coeff, revolution_rate, colony_weight,
// max_decades, mode ("meta"|"weights")}; network.{hidden, hidden_activation,
// output_activation, learning_rate}; inner.{max_epochs, patience};
// final.{max_epochs, patience}; validation_fraction; weight_bound; init_scale.
// "data" may instead be {"path": "file.csv", "reject": "fail"|"skip"}.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cropml/error.hpp"
#include "cropml/experiments.hpp"

namespace cropml {

/// Raised for a bad field; what() names the field path.
class ConfigError : public InvalidConfigError {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : InvalidConfigError("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace config_detail {

using nlohmann::json;

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

inline void only_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key), "unknown key");
  }
}

template <std::unsigned_integral T>
void read(const json& j, const std::string& path, std::string_view key, T& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(std::string(key));
  if (!v.is_number_unsigned()) throw ConfigError(join(path, key), "expected a non-negative integer");
  out = v.get<T>();
}

inline void read(const json& j, const std::string& path, std::string_view key, double& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(std::string(key));
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  out = v.get<double>();
}

inline void read(const json& j, const std::string& path, std::string_view key, int& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(std::string(key));
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  out = v.get<int>();
}

inline void read(const json& j, const std::string& path, std::string_view key, std::string& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(std::string(key));
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  out = v.get<std::string>();
}

inline YearRange read_years(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigError(path, "expected [first_year, last_year]");
  YearRange r{j[0].get<int>(), j[1].get<int>()};
  if (r.first > r.last) throw ConfigError(path, "first year after last year");
  return r;
}

inline void read_budget(const json& j, const std::string& path, TrainOptions& out) {
  only_keys(j, path, {"max_epochs", "patience"});
  read(j, path, "max_epochs", out.max_epochs);
  read(j, path, "patience", out.patience);
}

inline HybridConfig read_hybrid(const json& j, const std::string& path) {
  HybridConfig c;
  only_keys(j, path,
            {"gwo", "ica", "network", "inner", "final", "validation_fraction", "weight_bound", "init_scale"});
  if (j.contains("gwo")) {
    const auto& g = j["gwo"];
    const auto p = join(path, "gwo");
    only_keys(g, p, {"pop_size", "num_iter"});
    read(g, p, "pop_size", c.gwo.pop_size);
    read(g, p, "num_iter", c.gwo.num_iter);
    if (c.gwo.pop_size < 3) throw ConfigError(join(p, "pop_size"), "must be at least 3");
  }
  if (j.contains("ica")) {
    const auto& i = j["ica"];
    const auto p = join(path, "ica");
    only_keys(i, p,
              {"n_countries", "n_imperialists", "assimilation_coeff", "revolution_rate", "colony_weight",
               "max_decades", "mode"});
    read(i, p, "n_countries", c.ica.n_countries);
    read(i, p, "n_imperialists", c.ica.n_imperialists);
    read(i, p, "assimilation_coeff", c.ica.assimilation_coeff);
    read(i, p, "revolution_rate", c.ica.revolution_rate);
    read(i, p, "colony_weight", c.ica.colony_weight);
    read(i, p, "max_decades", c.ica.max_decades);
    std::string mode = "meta";
    read(i, p, "mode", mode);
    if (mode == "meta")
      c.ica_mode = IcaMode::kMetaParameters;
    else if (mode == "weights")
      c.ica_mode = IcaMode::kWeights;
    else
      throw ConfigError(join(p, "mode"), "expected \"meta\" or \"weights\"");
    if (c.ica.n_imperialists < 1 || c.ica.n_imperialists >= c.ica.n_countries)
      throw ConfigError(join(p, "n_imperialists"), "must satisfy 1 <= n_imperialists < n_countries");
    if (!(c.ica.assimilation_coeff > 0)) throw ConfigError(join(p, "assimilation_coeff"), "must be positive");
    if (!(c.ica.revolution_rate >= 0 && c.ica.revolution_rate <= 1))
      throw ConfigError(join(p, "revolution_rate"), "must lie in [0,1]");
    if (!(c.ica.colony_weight >= 0 && c.ica.colony_weight <= 1))
      throw ConfigError(join(p, "colony_weight"), "must lie in [0,1]");
  }
  if (j.contains("network")) {
    const auto& n = j["network"];
    const auto p = join(path, "network");
    only_keys(n, p, {"hidden", "hidden_activation", "output_activation", "learning_rate"});
    read(n, p, "hidden", c.network.hidden);
    read(n, p, "hidden_activation", c.network.hidden_activation);
    read(n, p, "output_activation", c.network.output_activation);
    read(n, p, "learning_rate", c.network.learning_rate);
    if (c.network.hidden < kMinHidden || c.network.hidden > kMaxHidden)
      throw ConfigError(join(p, "hidden"), "must satisfy 1 < hidden < 100");
    for (auto [key, value] : {std::pair{"hidden_activation", c.network.hidden_activation},
                              std::pair{"output_activation", c.network.output_activation}})
      if (value < kMinActivationIndex || value > kMaxActivationIndex)
        throw ConfigError(join(p, key), "activation index must lie in [1,5]");
    if (!(c.network.learning_rate > 0 && c.network.learning_rate <= kMaxLearningRate))
      throw ConfigError(join(p, "learning_rate"), "must lie in (0,5]");
  }
  if (j.contains("inner")) read_budget(j["inner"], join(path, "inner"), c.inner);
  if (j.contains("final")) read_budget(j["final"], join(path, "final"), c.final_training);
  if (c.final_training.max_epochs < 1) throw ConfigError(join(path, "final.max_epochs"), "must be at least 1");
  read(j, path, "validation_fraction", c.validation_fraction);
  read(j, path, "weight_bound", c.weight_bound);
  read(j, path, "init_scale", c.init_scale);
  if (!(c.validation_fraction > 0 && c.validation_fraction < 1))
    throw ConfigError(join(path, "validation_fraction"), "must lie in (0,1)");
  if (!(c.weight_bound > 0)) throw ConfigError(join(path, "weight_bound"), "must be positive");
  if (!(c.init_scale > 0)) throw ConfigError(join(path, "init_scale"), "must be positive");
  return c;
}

inline std::size_t parse_attribute_code(const std::string& code, const std::string& path) {
  if (code.size() == 3 && (code[0] == 'A' || code[0] == 'a') && (code[1] == 'T' || code[1] == 't') &&
      code[2] >= '1' && code[2] <= '7')
    return static_cast<std::size_t>(code[2] - '1');
  throw ConfigError(path, "unknown attribute '" + code + "' (expected AT1..AT7)");
}

}  // namespace config_detail

/// Methods used when a config lists none: ANN-ICA then ANN-GWO with defaults.
inline std::vector<MethodEntry> default_methods() {
  return {{"ANN-ICA", Method::kAnnIca, {}}, {"ANN-GWO", Method::kAnnGwo, {}}};
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using namespace config_detail;
  only_keys(j, "",
            {"data", "split", "crops", "attributes", "seeds", "importance_repeats", "threads", "out", "methods"});
  ExperimentConfig c;
  if (j.contains("data")) {
    const auto& d = j["data"];
    only_keys(d, "data", {"path", "reject", "synthesize"});
    if (d.contains("path") == d.contains("synthesize"))
      throw ConfigError("data", "give exactly one of 'path' or 'synthesize'");
    if (d.contains("path")) {
      std::string path;
      read(d, "data", "path", path);
      c.data_path = path;
      std::string reject = "fail";
      read(d, "data", "reject", reject);
      if (reject == "fail")
        c.reject_policy = RejectPolicy::kFail;
      else if (reject == "skip")
        c.reject_policy = RejectPolicy::kSkip;
      else
        throw ConfigError("data.reject", "expected \"fail\" or \"skip\"");
    } else {
      const auto& s = d["synthesize"];
      only_keys(s, "data.synthesize", {"seed", "n_per_crop", "noise_sd", "layout"});
      read(s, "data.synthesize", "seed", c.synthesize.seed);
      read(s, "data.synthesize", "n_per_crop", c.synthesize.n_per_crop);
      read(s, "data.synthesize", "noise_sd", c.synthesize.noise_sd);
      std::string layout = "uniform";
      read(s, "data.synthesize", "layout", layout);
      if (layout != "uniform" && layout != "reference")
        throw ConfigError("data.synthesize.layout", "expected \"uniform\" or \"reference\"");
      c.synthesize.reference_layout = layout == "reference";
      if (c.synthesize.n_per_crop < 1) throw ConfigError("data.synthesize.n_per_crop", "must be at least 1");
      if (c.synthesize.noise_sd < 0) throw ConfigError("data.synthesize.noise_sd", "must be non-negative");
    }
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    only_keys(s, "split", {"train_years", "test_years"});
    if (s.contains("train_years")) c.split.train = read_years(s["train_years"], "split.train_years");
    if (s.contains("test_years")) c.split.test = read_years(s["test_years"], "split.test_years");
    try {
      c.split.validate();
    } catch (const InvalidConfigError& e) {
      throw ConfigError("split", e.what());
    }
  }
  if (j.contains("crops")) {
    const auto& cr = j["crops"];
    if (!cr.is_array()) throw ConfigError("crops", "expected an array of crop names");
    for (const auto& v : cr) {
      if (!v.is_string()) throw ConfigError("crops", "expected an array of crop names");
      c.crops.push_back(v.get<std::string>());
    }
  }
  if (j.contains("attributes")) {
    const auto& a = j["attributes"];
    only_keys(a, "attributes", {"policy", "selected"});
    std::string policy = "fixed";
    read(a, "attributes", "policy", policy);
    if (policy == "fixed")
      c.attribute_policy = AttributePolicy::kFixed;
    else if (policy == "search")
      c.attribute_policy = AttributePolicy::kSearch;
    else
      throw ConfigError("attributes.policy", "expected \"fixed\" or \"search\"");
    if (a.contains("selected")) {
      const auto& sel = a["selected"];
      if (!sel.is_array() || sel.empty()) throw ConfigError("attributes.selected", "expected a non-empty array");
      c.attributes.clear();
      for (const auto& v : sel) {
        if (!v.is_string()) throw ConfigError("attributes.selected", "expected attribute codes");
        const auto idx = parse_attribute_code(v.get<std::string>(), "attributes.selected");
        if (std::find(c.attributes.begin(), c.attributes.end(), idx) != c.attributes.end())
          throw ConfigError("attributes.selected", "duplicate attribute");
        c.attributes.push_back(idx);
      }
      std::sort(c.attributes.begin(), c.attributes.end());
    }
  }
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (!s.is_array() || s.empty()) throw ConfigError("seeds", "expected a non-empty array of integers");
    c.seeds.clear();
    for (const auto& v : s) {
      if (!v.is_number_unsigned()) throw ConfigError("seeds", "expected non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  read(j, "", "importance_repeats", c.importance_repeats);
  if (c.importance_repeats < 1) throw ConfigError("importance_repeats", "must be at least 1");
  read(j, "", "threads", c.threads);
  read(j, "", "out", c.out_dir);
  if (j.contains("methods")) {
    const auto& ms = j["methods"];
    if (!ms.is_array() || ms.empty()) throw ConfigError("methods", "expected a non-empty array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const auto path = "methods[" + std::to_string(i) + "]";
      only_keys(ms[i], path, {"label", "method", "config"});
      std::string method;
      read(ms[i], path, "method", method);
      MethodEntry entry;
      try {
        entry.method = parse_method(method);
      } catch (const InvalidConfigError& e) {
        throw ConfigError(path + ".method", e.what());
      }
      entry.label = method;
      read(ms[i], path, "label", entry.label);
      if (entry.label.empty() || entry.label.find(',') != std::string::npos)
        throw ConfigError(path + ".label", "must be non-empty and contain no commas");
      for (const auto& other : c.methods)
        if (other.label == entry.label) throw ConfigError(path + ".label", "duplicate label '" + entry.label + "'");
      if (ms[i].contains("config")) entry.config = read_hybrid(ms[i]["config"], path + ".config");
      c.methods.push_back(std::move(entry));
    }
  } else {
    c.methods = default_methods();
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

/// Fully resolved config as JSON; parsing it back yields the same config.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  if (c.data_path)
    j["data"] = {{"path", *c.data_path}, {"reject", c.reject_policy == RejectPolicy::kFail ? "fail" : "skip"}};
  else
    j["data"] = {{"synthesize",
                  {{"seed", c.synthesize.seed},
                   {"n_per_crop", c.synthesize.n_per_crop},
                   {"noise_sd", c.synthesize.noise_sd},
                   {"layout", c.synthesize.reference_layout ? "reference" : "uniform"}}}};
  j["split"] = {{"train_years", {c.split.train.first, c.split.train.last}},
                {"test_years", {c.split.test.first, c.split.test.last}}};
  j["crops"] = c.crops;
  std::vector<std::string> codes;
  for (auto a : c.attributes) codes.push_back(attribute_code(a));
  j["attributes"] = {{"policy", c.attribute_policy == AttributePolicy::kFixed ? "fixed" : "search"},
                     {"selected", codes}};
  j["seeds"] = c.seeds;
  j["importance_repeats"] = c.importance_repeats;
  j["threads"] = c.threads;
  j["out"] = c.out_dir;
  j["methods"] = json::array();
  for (const auto& m : c.methods) {
    const auto& h = m.config;
    j["methods"].push_back(
        {{"label", m.label},
         {"method", std::string(method_name(m.method))},
         {"config",
          {{"gwo", {{"pop_size", h.gwo.pop_size}, {"num_iter", h.gwo.num_iter}}},
           {"ica",
            {{"n_countries", h.ica.n_countries},
             {"n_imperialists", h.ica.n_imperialists},
             {"assimilation_coeff", h.ica.assimilation_coeff},
             {"revolution_rate", h.ica.revolution_rate},
             {"colony_weight", h.ica.colony_weight},
             {"max_decades", h.ica.max_decades},
             {"mode", h.ica_mode == IcaMode::kMetaParameters ? "meta" : "weights"}}},
           {"network",
            {{"hidden", h.network.hidden},
             {"hidden_activation", h.network.hidden_activation},
             {"output_activation", h.network.output_activation},
             {"learning_rate", h.network.learning_rate}}},
           {"inner", {{"max_epochs", h.inner.max_epochs}, {"patience", h.inner.patience}}},
           {"final", {{"max_epochs", h.final_training.max_epochs}, {"patience", h.final_training.patience}}},
           {"validation_fraction", h.validation_fraction},
           {"weight_bound", h.weight_bound},
           {"init_scale", h.init_scale}}}});
  }
  return j;
}

}  // namespace cropml

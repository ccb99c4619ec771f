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

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cropml/error.hpp"
#include "cropml/random.hpp"

namespace cropml {

/// Axis-aligned search box, lower[k] < upper[k] for every k.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static Bounds uniform(std::size_t dim, double lo, double hi) {
    return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  }

  std::size_t dim() const noexcept { return lower.size(); }

  void validate() const {
    if (lower.empty()) throw InvalidConfigError("bounds have zero dimension");
    if (lower.size() != upper.size()) throw InvalidConfigError("lower and upper bounds differ in length");
    for (std::size_t k = 0; k < lower.size(); ++k)
      if (!(lower[k] < upper[k]))
        throw InvalidConfigError("bound " + std::to_string(k) + " has lower >= upper");
  }

  void clamp(std::span<double> x) const {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lower[k], upper[k]);
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] < lower[k] || x[k] > upper[k]) return false;
    return true;
  }

  template <UniformSource Source>
  std::vector<double> sample(Source& source) const {
    std::vector<double> x(dim());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = lower[k] + (upper[k] - lower[k]) * source.uniform01();
    return x;
  }
};

inline void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw InputShapeError(std::string(what) + ": lengths " + std::to_string(a) + " and " + std::to_string(b));
}

}  // namespace cropml

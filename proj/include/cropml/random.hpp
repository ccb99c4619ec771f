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
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cropml {

/// Anything that yields uniform draws in [0, 1). Optimizer steps are written
/// against this concept so tests can feed them a scripted transcript.
template <typename T>
concept UniformSource = requires(T& source) {
  { source.uniform01() } -> std::convertible_to<double>;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the sub-stream identified by `keys` under `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t state = mix_seed(seed);
  for (std::uint64_t key : keys) state = mix_seed(state ^ mix_seed(key + 0x632be59bd9b4e019ULL));
  return state;
}

/// Seeded deterministic generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  double uniform01() { return std::generate_canonical<double, 53>(engine_); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Integer in [0, n) from one uniform draw.
template <UniformSource Source>
std::size_t draw_index(Source& source, std::size_t n) {
  const auto i = static_cast<std::size_t>(source.uniform01() * static_cast<double>(n));
  return std::min(i, n - 1);
}

/// Fisher-Yates shuffle driven by a UniformSource.
template <UniformSource Source, typename Range>
void shuffle_with(Source& source, Range& range) {
  const std::size_t n = std::size(range);
  for (std::size_t i = n; i > 1; --i) {
    using std::swap;
    swap(range[i - 1], range[draw_index(source, i)]);
  }
}

}  // namespace cropml

// Copyright 2026 The mixup-transformer Authors.
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

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace mixup {

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; every transform on top of it
/// (uniforms, normals, gammas) is implemented here rather than taken from
/// <random> distributions, whose algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream keyed by name, e.g. derive("dropout").
  Rng derive(std::string_view stream) const;
  Rng derive(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer on [0, n), rejection sampled so it is unbiased.
  std::size_t below(std::size_t n);
  /// Standard normal via the Box-Muller transform (one draw per call).
  double normal();
  /// Normal truncated to [-2 stddev, 2 stddev] by resampling.
  double truncated_normal(double stddev);
  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze acceptance.
  double gamma(double shape);
  /// Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over bytes; stable identifier for stream names and hashes.
std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

}  // namespace mixup

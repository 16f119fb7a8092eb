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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "data/dataset.hpp"
#include "model/encoder.hpp"

namespace mixup {

enum class MixMode { none, cls, input, manifold };
enum class PaddingStrategy { none, pair, max };
enum class PaddingToken { sep, pad, unused };

const char* to_string(MixMode mode) noexcept;
const char* to_string(PaddingStrategy strategy) noexcept;
const char* to_string(PaddingToken token) noexcept;
MixMode parse_mix_mode(const std::string& name);
PaddingStrategy parse_padding_strategy(const std::string& name);
PaddingToken parse_padding_token(const std::string& name);
std::size_t padding_token_id(PaddingToken token) noexcept;

/// Parses "0-5", "0,3,5", or a mix such as "0,2-4" into a sorted set.
std::vector<LayerIndex> parse_layer_set(const std::string& spec);
std::string format_layer_set(std::span<const LayerIndex> layers);

struct MixupConfig {
  MixMode mode = MixMode::none;
  double alpha = 1.0;
  /// Eligible layers for manifold mode.
  std::vector<LayerIndex> layer_set;
  PaddingStrategy padding = PaddingStrategy::pair;
  PaddingToken padding_token = PaddingToken::sep;
  /// MixUp starts at epoch ceil(start_fraction * epochs).
  double start_fraction = 0.0;

  void validate(std::size_t n_layers) const;
};

/// Independent streams for the three per-batch draws. The overrides replace
/// a draw with a fixed value and are meant for tests and endpoint checks.
struct MixupRandom {
  Rng lambda;
  Rng pairing;
  Rng layer;
  std::optional<double> lambda_override;
  std::optional<std::vector<std::size_t>> pairing_override;

  static MixupRandom from_seed(std::uint64_t seed);
};

struct MixedBatch {
  /// Interpolated representation at the mixing layer.
  Tensor mixed_repr;
  /// Layer-k representations of the primary rows and of their partners.
  Tensor primary_repr;
  Tensor partner_repr;
  /// Row-major [B, n_classes].
  std::vector<double> mixed_labels;
  double lambda = 1.0;
  LayerIndex layer{0};
  /// Row i is mixed with row pairing[i].
  std::vector<std::size_t> pairing;
  Tensor logits;
};

/// One Beta(alpha, alpha) draw.
double sample_lambda(double alpha, Rng& rng);
/// Uniform random permutation of [0, batch_size); fixed points allowed.
std::vector<std::size_t> pair_batch(std::size_t batch_size, Rng& rng);
/// lambda * a + (1 - lambda) * b.
Tensor interpolate(const Tensor& a, const Tensor& b, double lambda);
/// lambda * a + (1 - lambda) * b on plain label rows.
std::vector<double> interpolate_labels(std::span<const double> a,
                                       std::span<const double> b, double lambda);

/// Extends two token sequences to a common length with the padding token.
/// pair: the longer of the two; max: global_max; none: lengths must match.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> pad_pair(
    std::span<const std::size_t> first, std::span<const std::size_t> second,
    PaddingStrategy strategy, PaddingToken token, std::size_t global_max,
    std::size_t max_seq_len);

/// Uniform draw from S; always consumes exactly one draw.
LayerIndex select_mix_layer(std::span<const LayerIndex> layers, Rng& rng);

/// The layer a batch is mixed at for the given mode (draws for manifold).
LayerIndex resolve_mix_layer(const MixupConfig& config, const Encoder& encoder,
                             Rng& layer_rng);

/// Whether batches must be brought to a common token length before mixing.
bool needs_token_padding(const MixupConfig& config, const Encoder& encoder);

struct MixupStepResult {
  Tensor loss;
  MixedBatch batch;
};

/// One MixUp forward pass: draws lambda and the pairing, resolves the layer,
/// runs both operands to that layer, interpolates representations and
/// labels, continues to the logits, and returns the soft-label loss. The
/// batch size is unchanged. global_max is the padded length used by the max
/// strategy.
MixupStepResult mixup_step(const Encoder& encoder, const Batch& batch,
                           const MixupConfig& config, MixupRandom& random,
                           std::size_t global_max = 0);

}  // namespace mixup

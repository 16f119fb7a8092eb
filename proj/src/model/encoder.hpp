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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace mixup {

struct EncoderConfig {
  std::size_t n_layers = 4;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  std::size_t max_seq_len = 64;
  std::size_t vocab_size = 0;
  std::size_t n_classes = 2;
  double dropout_rate = 0.1;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Where a representation lives in the network: 0 is the token embedding
/// layer, 1..n the output of encoder layer k, n+1 the pooled sentence
/// embedding.
class LayerIndex {
 public:
  constexpr explicit LayerIndex(std::size_t k) : k_(k) {}
  constexpr std::size_t value() const noexcept { return k_; }
  auto operator<=>(const LayerIndex&) const = default;

 private:
  std::size_t k_;
};

/// Token ids and attention mask, both row-major [batch, length].
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<std::size_t> ids;
  std::vector<std::uint8_t> mask;

  void validate() const;
};

class Encoder {
 public:
  Encoder(const EncoderConfig& config, Rng& init_rng);

  const EncoderConfig& config() const noexcept { return config_; }
  LayerIndex input_layer() const noexcept { return LayerIndex(0); }
  LayerIndex pooled_layer() const noexcept {
    return LayerIndex(config_.n_layers + 1);
  }

  /// Training mode draws dropout masks from dropout_rng, which must outlive
  /// the mode.
  void train_mode(Rng& dropout_rng) noexcept { dropout_rng_ = &dropout_rng; }
  void eval_mode() noexcept { dropout_rng_ = nullptr; }
  bool training() const noexcept { return dropout_rng_ != nullptr; }

  /// Token plus position embeddings; the layer-0 representation [B,L,d].
  Tensor embed(const TokenBatch& tokens) const;
  Tensor forward_to_layer(const TokenBatch& tokens, LayerIndex k) const;
  /// Continues from a layer-k representation to the pooled embedding [B,d].
  Tensor forward_from_layer(const Tensor& h, LayerIndex k,
                            std::span<const std::uint8_t> mask) const;
  Tensor pool_cls(const Tensor& h) const;
  Tensor classify(const Tensor& sentence) const;
  /// Logits [B, n_classes].
  Tensor forward(const TokenBatch& tokens) const;

  /// Attention probabilities [B,H,L,L] of the given encoder layer (1-based),
  /// computed without dropout.
  Tensor attention_probabilities(const TokenBatch& tokens,
                                 std::size_t layer) const;

  /// Every trainable tensor in canonical order.
  std::vector<NamedTensor> parameters() const;
  /// Deep copy with independent parameter storage.
  Encoder clone() const;
  /// 64-bit digest of all parameter bytes.
  std::uint64_t parameter_hash() const;

  void save(const std::filesystem::path& path) const;
  static Encoder load(const std::filesystem::path& path);

 private:
  struct Layer {
    Tensor query_w, query_b, key_w, key_b, value_w, value_b, out_w, out_b;
    Tensor attn_norm_g, attn_norm_b;
    Tensor ff_in_w, ff_in_b, ff_out_w, ff_out_b;
    Tensor ff_norm_g, ff_norm_b;
  };

  Encoder() = default;
  void allocate(Rng* init_rng);
  Tensor maybe_dropout(const Tensor& x) const;
  Tensor attention(const Tensor& h, const Layer& layer,
                   std::span<const std::uint8_t> mask, Tensor* probs) const;
  Tensor encoder_layer(const Tensor& h, const Layer& layer,
                       std::span<const std::uint8_t> mask,
                       Tensor* probs = nullptr) const;
  void check_layer(LayerIndex k) const;

  EncoderConfig config_;
  Tensor token_embedding_;
  Tensor position_embedding_;
  std::vector<Layer> layers_;
  Tensor pooler_w_, pooler_b_;
  Tensor classifier_w_, classifier_b_;
  Rng* dropout_rng_ = nullptr;
};

}  // namespace mixup

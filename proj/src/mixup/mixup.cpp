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

#include "mixup/mixup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "data/vocab.hpp"

namespace mixup {

const char* to_string(MixMode mode) noexcept {
  switch (mode) {
    case MixMode::none: return "none";
    case MixMode::cls: return "cls";
    case MixMode::input: return "input";
    case MixMode::manifold: return "manifold";
  }
  return "unknown";
}

const char* to_string(PaddingStrategy strategy) noexcept {
  switch (strategy) {
    case PaddingStrategy::none: return "none";
    case PaddingStrategy::pair: return "pair";
    case PaddingStrategy::max: return "max";
  }
  return "unknown";
}

const char* to_string(PaddingToken token) noexcept {
  switch (token) {
    case PaddingToken::sep: return "sep";
    case PaddingToken::pad: return "pad";
    case PaddingToken::unused: return "unused";
  }
  return "unknown";
}

MixMode parse_mix_mode(const std::string& name) {
  for (MixMode m : {MixMode::none, MixMode::cls, MixMode::input, MixMode::manifold}) {
    if (name == to_string(m)) return m;
  }
  fail(ErrorKind::parameter, "unknown mixup mode '" + name + "'");
}

PaddingStrategy parse_padding_strategy(const std::string& name) {
  for (PaddingStrategy s : {PaddingStrategy::none, PaddingStrategy::pair, PaddingStrategy::max}) {
    if (name == to_string(s)) return s;
  }
  fail(ErrorKind::parameter, "unknown padding strategy '" + name + "'");
}

PaddingToken parse_padding_token(const std::string& name) {
  for (PaddingToken t : {PaddingToken::sep, PaddingToken::pad, PaddingToken::unused}) {
    if (name == to_string(t)) return t;
  }
  fail(ErrorKind::parameter, "unknown padding token '" + name + "'");
}

std::size_t padding_token_id(PaddingToken token) noexcept {
  switch (token) {
    case PaddingToken::sep: return Vocab::kSep;
    case PaddingToken::pad: return Vocab::kPad;
    case PaddingToken::unused: return Vocab::kUnused;
  }
  return Vocab::kSep;
}

std::vector<LayerIndex> parse_layer_set(const std::string& spec) {
  std::vector<std::size_t> ks;
  std::stringstream in(spec);
  std::string part;
  auto number = [&](const std::string& s) -> std::size_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      fail(ErrorKind::parameter, "invalid layer set '" + spec + "'");
    }
    return static_cast<std::size_t>(std::stoull(s));
  };
  while (std::getline(in, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      ks.push_back(number(part));
    } else {
      const std::size_t lo = number(part.substr(0, dash));
      const std::size_t hi = number(part.substr(dash + 1));
      require(lo <= hi, ErrorKind::parameter, "invalid layer range '" + part + "'");
      for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
    }
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<LayerIndex> out;
  for (std::size_t k : ks) out.emplace_back(k);
  return out;
}

std::string format_layer_set(std::span<const LayerIndex> layers) {
  std::string out;
  for (const auto& k : layers) {
    if (!out.empty()) out.push_back(',');
    out += std::to_string(k.value());
  }
  return out;
}

void MixupConfig::validate(std::size_t n_layers) const {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::parameter,
          "alpha must be positive");
  require(start_fraction >= 0.0 && start_fraction <= 1.0, ErrorKind::parameter,
          "start_fraction must be in [0, 1]");
  if (mode == MixMode::manifold) {
    require(!layer_set.empty(), ErrorKind::parameter,
            "manifold mixup needs a non-empty layer set");
  }
  for (const auto& k : layer_set) {
    require(k.value() <= n_layers + 1, ErrorKind::parameter,
            "layer " + std::to_string(k.value()) + " outside [0, " +
                std::to_string(n_layers + 1) + "]");
  }
}

MixupRandom MixupRandom::from_seed(std::uint64_t seed) {
  const Rng root(seed);
  return {root.derive("lambda"), root.derive("pairing"), root.derive("layer"),
          std::nullopt, std::nullopt};
}

double sample_lambda(double alpha, Rng& rng) {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::parameter,
          "alpha must be positive");
  return rng.beta(alpha, alpha);
}

std::vector<std::size_t> pair_batch(std::size_t batch_size, Rng& rng) {
  require(batch_size >= 1, ErrorKind::parameter, "batch_size must be >= 1");
  std::vector<std::size_t> perm(batch_size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = batch_size; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  return perm;
}

Tensor interpolate(const Tensor& a, const Tensor& b, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, ErrorKind::contract,
          "lambda must be in [0, 1]");
  require(a.shape() == b.shape(), ErrorKind::contract,
          "cannot interpolate " + shape_string(a.shape()) + " with " +
              shape_string(b.shape()));
  return axpby(lambda, a, 1.0 - lambda, b);
}

std::vector<double> interpolate_labels(std::span<const double> a,
                                       std::span<const double> b, double lambda) {
  require(a.size() == b.size(), ErrorKind::contract, "label rows differ in size");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = lambda * a[i] + (1.0 - lambda) * b[i];
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> pad_pair(
    std::span<const std::size_t> first, std::span<const std::size_t> second,
    PaddingStrategy strategy, PaddingToken token, std::size_t global_max,
    std::size_t max_seq_len) {
  require(!first.empty() && !second.empty(), ErrorKind::contract,
          "pad_pair needs non-empty sequences");
  std::vector<std::size_t> a(first.begin(), first.end());
  std::vector<std::size_t> b(second.begin(), second.end());
  std::size_t target = 0;
  switch (strategy) {
    case PaddingStrategy::none:
      require(a.size() == b.size(), ErrorKind::contract,
              "lengths " + std::to_string(a.size()) + " and " +
                  std::to_string(b.size()) + " differ with padding disabled");
      return {std::move(a), std::move(b)};
    case PaddingStrategy::pair:
      target = std::max(a.size(), b.size());
      break;
    case PaddingStrategy::max:
      target = std::max({global_max, a.size(), b.size()});
      break;
  }
  // Over-long input is tail-truncated as tokenize() does: keep [CLS] and
  // end on [SEP].
  target = std::min(target, max_seq_len);
  auto fit = [&](std::vector<std::size_t>& s) {
    if (s.size() > target) {
      s.resize(target);
      s.back() = Vocab::kSep;
    }
    s.resize(target, padding_token_id(token));
  };
  fit(a);
  fit(b);
  return {std::move(a), std::move(b)};
}

LayerIndex select_mix_layer(std::span<const LayerIndex> layers, Rng& rng) {
  require(!layers.empty(), ErrorKind::parameter, "layer set is empty");
  return layers[rng.below(layers.size())];
}

LayerIndex resolve_mix_layer(const MixupConfig& config, const Encoder& encoder,
                             Rng& layer_rng) {
  switch (config.mode) {
    case MixMode::cls: return encoder.pooled_layer();
    case MixMode::input: return encoder.input_layer();
    case MixMode::manifold: return select_mix_layer(config.layer_set, layer_rng);
    case MixMode::none: break;
  }
  fail(ErrorKind::contract, "mixup_step called with mode none");
}

bool needs_token_padding(const MixupConfig& config, const Encoder& encoder) {
  if (config.padding == PaddingStrategy::none) return false;
  if (config.mode == MixMode::input) return true;
  if (config.mode == MixMode::manifold) {
    return std::any_of(config.layer_set.begin(), config.layer_set.end(),
                       [&](const LayerIndex& k) { return k < encoder.pooled_layer(); });
  }
  return false;
}

namespace {

struct OperandPair {
  TokenBatch primary;
  TokenBatch partner;
  // Attention mask of the mixed rows.
  std::vector<std::uint8_t> mixed_mask;
};

std::span<const std::size_t> row_tokens(const Batch& batch, std::size_t row) {
  return {batch.tokens.ids.data() + row * batch.tokens.length, batch.lengths[row]};
}

// Row i of primary is batch row i, row i of partner is batch row pairing[i].
OperandPair build_operands(const Batch& batch, const std::vector<std::size_t>& pairing,
                           const MixupConfig& config, bool pad_tokens,
                           std::size_t global_max, std::size_t max_seq_len) {
  const std::size_t b = batch.size();
  OperandPair ops;
  if (!pad_tokens) {
    // Partner rows keep their own masks; the mixed row attends where the
    // primary row does.
    ops.primary = batch.tokens;
    ops.partner.batch = b;
    ops.partner.length = batch.tokens.length;
    const std::size_t len = batch.tokens.length;
    ops.partner.ids.resize(b * len);
    ops.partner.mask.resize(b * len);
    for (std::size_t i = 0; i < b; ++i) {
      std::copy_n(batch.tokens.ids.begin() + static_cast<std::ptrdiff_t>(pairing[i] * len), len,
                  ops.partner.ids.begin() + static_cast<std::ptrdiff_t>(i * len));
      std::copy_n(batch.tokens.mask.begin() + static_cast<std::ptrdiff_t>(pairing[i] * len), len,
                  ops.partner.mask.begin() + static_cast<std::ptrdiff_t>(i * len));
    }
    ops.mixed_mask = batch.tokens.mask;
    return ops;
  }
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> padded;
  std::size_t len = 0;
  for (std::size_t i = 0; i < b; ++i) {
    padded.push_back(pad_pair(row_tokens(batch, i), row_tokens(batch, pairing[i]),
                              config.padding, config.padding_token, global_max,
                              max_seq_len));
    len = std::max(len, padded.back().first.size());
  }
  for (TokenBatch* t : {&ops.primary, &ops.partner}) {
    t->batch = b;
    t->length = len;
    t->ids.assign(b * len, Vocab::kPad);
    t->mask.assign(b * len, 0);
  }
  for (std::size_t i = 0; i < b; ++i) {
    const auto& [first, second] = padded[i];
    for (std::size_t t = 0; t < first.size(); ++t) {
      ops.primary.ids[i * len + t] = first[t];
      ops.partner.ids[i * len + t] = second[t];
      ops.primary.mask[i * len + t] = 1;
      ops.partner.mask[i * len + t] = 1;
    }
  }
  ops.mixed_mask = ops.primary.mask;
  return ops;
}

}  // namespace

MixupStepResult mixup_step(const Encoder& encoder, const Batch& batch,
                           const MixupConfig& config, MixupRandom& random,
                           std::size_t global_max) {
  config.validate(encoder.config().n_layers);
  const std::size_t b = batch.size();
  require(b >= 1 && batch.n_classes == encoder.config().n_classes, ErrorKind::contract,
          "batch does not match the classifier");

  MixedBatch mixed;
  mixed.lambda = sample_lambda(config.alpha, random.lambda);
  if (random.lambda_override) mixed.lambda = *random.lambda_override;
  mixed.pairing = pair_batch(b, random.pairing);
  if (random.pairing_override) {
    mixed.pairing = *random.pairing_override;
    std::vector<std::size_t> check = mixed.pairing;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i) {
      require(check.size() == b && check[i] == i, ErrorKind::contract,
              "pairing override is not a permutation of the batch");
    }
  }
  mixed.layer = resolve_mix_layer(config, encoder, random.layer);

  const OperandPair ops =
      build_operands(batch, mixed.pairing, config, needs_token_padding(config, encoder),
                     global_max, encoder.config().max_seq_len);

  mixed.primary_repr = encoder.forward_to_layer(ops.primary, mixed.layer);
  mixed.partner_repr = encoder.forward_to_layer(ops.partner, mixed.layer);
  mixed.mixed_repr = interpolate(mixed.primary_repr, mixed.partner_repr, mixed.lambda);
  mixed.logits = encoder.classify(
      encoder.forward_from_layer(mixed.mixed_repr, mixed.layer, ops.mixed_mask));

  const std::size_t k = batch.n_classes;
  mixed.mixed_labels.resize(b * k);
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = interpolate_labels(
        std::span<const double>(batch.one_hot).subspan(i * k, k),
        std::span<const double>(batch.one_hot).subspan(mixed.pairing[i] * k, k),
        mixed.lambda);
    std::copy(row.begin(), row.end(), mixed.mixed_labels.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  Tensor target = Tensor::from({b, k}, mixed.mixed_labels);
  Tensor loss = cross_entropy_soft(mixed.logits, target);
  return {std::move(loss), std::move(mixed)};
}

}  // namespace mixup

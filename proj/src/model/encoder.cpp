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

#include "model/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/error.hpp"

namespace mixup {

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr double kInitStddev = 0.02;

}  // namespace

void EncoderConfig::validate() const {
  require(n_layers >= 1, ErrorKind::parameter, "n_layers must be >= 1");
  require(d_model >= 1 && n_heads >= 1 && d_model % n_heads == 0,
          ErrorKind::parameter, "d_model must be divisible by n_heads");
  require(d_ff >= 1, ErrorKind::parameter, "d_ff must be >= 1");
  require(max_seq_len >= 2, ErrorKind::parameter, "max_seq_len must be >= 2");
  require(vocab_size >= 1, ErrorKind::parameter, "vocab_size must be >= 1");
  require(n_classes >= 2, ErrorKind::parameter, "n_classes must be >= 2");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorKind::parameter,
          "dropout_rate must be in [0, 1)");
}

void TokenBatch::validate() const {
  require(batch >= 1 && length >= 1, ErrorKind::contract,
          "token batch must be non-empty");
  require(ids.size() == batch * length && mask.size() == batch * length,
          ErrorKind::dimension,
          "token batch ids/mask do not match [" + std::to_string(batch) + "," +
              std::to_string(length) + "]");
}

Encoder::Encoder(const EncoderConfig& config, Rng& init_rng) : config_(config) {
  config_.validate();
  allocate(&init_rng);
}

void Encoder::allocate(Rng* init_rng) {
  const std::size_t d = config_.d_model;
  auto weight = [&](Shape shape) {
    Tensor t = Tensor::zeros(std::move(shape), true);
    if (init_rng != nullptr) {
      for (double& v : t.mutable_values()) v = init_rng->truncated_normal(kInitStddev);
    }
    return t;
  };
  auto zeros = [](std::size_t n) { return Tensor::zeros({n}, true); };
  auto ones = [](std::size_t n) {
    return Tensor::from({n}, std::vector<double>(n, 1.0), true);
  };

  token_embedding_ = weight({config_.vocab_size, d});
  position_embedding_ = weight({config_.max_seq_len, d});
  layers_.clear();
  for (std::size_t i = 0; i < config_.n_layers; ++i) {
    Layer l;
    l.query_w = weight({d, d});
    l.query_b = zeros(d);
    l.key_w = weight({d, d});
    l.key_b = zeros(d);
    l.value_w = weight({d, d});
    l.value_b = zeros(d);
    l.out_w = weight({d, d});
    l.out_b = zeros(d);
    l.attn_norm_g = ones(d);
    l.attn_norm_b = zeros(d);
    l.ff_in_w = weight({d, config_.d_ff});
    l.ff_in_b = zeros(config_.d_ff);
    l.ff_out_w = weight({config_.d_ff, d});
    l.ff_out_b = zeros(d);
    l.ff_norm_g = ones(d);
    l.ff_norm_b = zeros(d);
    layers_.push_back(std::move(l));
  }
  pooler_w_ = weight({d, d});
  pooler_b_ = zeros(d);
  classifier_w_ = weight({d, config_.n_classes});
  classifier_b_ = zeros(config_.n_classes);
}

std::vector<NamedTensor> Encoder::parameters() const {
  std::vector<NamedTensor> out;
  out.push_back({"embeddings.token", token_embedding_});
  out.push_back({"embeddings.position", position_embedding_});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string p = "layers." + std::to_string(i) + ".";
    out.push_back({p + "attention.query.weight", l.query_w});
    out.push_back({p + "attention.query.bias", l.query_b});
    out.push_back({p + "attention.key.weight", l.key_w});
    out.push_back({p + "attention.key.bias", l.key_b});
    out.push_back({p + "attention.value.weight", l.value_w});
    out.push_back({p + "attention.value.bias", l.value_b});
    out.push_back({p + "attention.output.weight", l.out_w});
    out.push_back({p + "attention.output.bias", l.out_b});
    out.push_back({p + "attention.norm.gamma", l.attn_norm_g});
    out.push_back({p + "attention.norm.beta", l.attn_norm_b});
    out.push_back({p + "feed_forward.in.weight", l.ff_in_w});
    out.push_back({p + "feed_forward.in.bias", l.ff_in_b});
    out.push_back({p + "feed_forward.out.weight", l.ff_out_w});
    out.push_back({p + "feed_forward.out.bias", l.ff_out_b});
    out.push_back({p + "feed_forward.norm.gamma", l.ff_norm_g});
    out.push_back({p + "feed_forward.norm.beta", l.ff_norm_b});
  }
  out.push_back({"pooler.weight", pooler_w_});
  out.push_back({"pooler.bias", pooler_b_});
  out.push_back({"classifier.weight", classifier_w_});
  out.push_back({"classifier.bias", classifier_b_});
  return out;
}

Encoder Encoder::clone() const {
  Encoder copy;
  copy.config_ = config_;
  copy.allocate(nullptr);
  const auto src = parameters();
  auto dst = copy.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto v = src[i].tensor.values();
    std::copy(v.begin(), v.end(), dst[i].tensor.mutable_values().begin());
  }
  return copy;
}

std::uint64_t Encoder::parameter_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : parameters()) {
    const auto v = p.tensor.values();
    h = fnv1a(v.data(), v.size() * sizeof(double), h);
  }
  return h;
}

void Encoder::check_layer(LayerIndex k) const {
  if (k.value() > config_.n_layers + 1) {
    fail(ErrorKind::contract, "layer index " + std::to_string(k.value()) +
                                  " outside [0, " +
                                  std::to_string(config_.n_layers + 1) + "]");
  }
}

Tensor Encoder::maybe_dropout(const Tensor& x) const {
  if (dropout_rng_ == nullptr) return x;
  return dropout(x, config_.dropout_rate, *dropout_rng_);
}

Tensor Encoder::embed(const TokenBatch& tokens) const {
  tokens.validate();
  if (tokens.length > config_.max_seq_len) {
    fail(ErrorKind::contract, "sequence length " +
                                  std::to_string(tokens.length) +
                                  " exceeds max_seq_len " +
                                  std::to_string(config_.max_seq_len));
  }
  const Shape ids_shape{tokens.batch, tokens.length};
  Tensor tok = embedding(token_embedding_, tokens.ids, ids_shape);
  std::vector<std::size_t> positions(tokens.batch * tokens.length);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = i % tokens.length;
  }
  Tensor pos = embedding(position_embedding_, positions, ids_shape);
  return maybe_dropout(add(tok, pos));
}

Tensor Encoder::attention(const Tensor& h, const Layer& layer,
                          std::span<const std::uint8_t> mask,
                          Tensor* probs_out) const {
  const std::size_t b = h.dim(0), len = h.dim(1), d = config_.d_model;
  const std::size_t heads = config_.n_heads, dh = d / heads;
  const Tensor flat = reshape(h, {b * len, d});
  auto split_heads = [&](const Tensor& x) {
    return reshape(permute(reshape(x, {b, len, heads, dh}), {0, 2, 1, 3}),
                   {b * heads, len, dh});
  };
  const Tensor q = split_heads(add_bias(matmul(flat, layer.query_w), layer.query_b));
  const Tensor k = split_heads(add_bias(matmul(flat, layer.key_w), layer.key_b));
  const Tensor v = split_heads(add_bias(matmul(flat, layer.value_w), layer.value_b));
  const Tensor scores =
      scale(batched_matmul(q, k, true), 1.0 / std::sqrt(static_cast<double>(dh)));
  const Tensor probs =
      softmax(mask_keys(reshape(scores, {b, heads, len, len}), mask), 3);
  if (probs_out != nullptr) *probs_out = probs;
  const Tensor context = batched_matmul(reshape(probs, {b * heads, len, len}), v);
  const Tensor merged = reshape(
      permute(reshape(context, {b, heads, len, dh}), {0, 2, 1, 3}), {b * len, d});
  return reshape(add_bias(matmul(merged, layer.out_w), layer.out_b), {b, len, d});
}

Tensor Encoder::encoder_layer(const Tensor& h, const Layer& layer,
                              std::span<const std::uint8_t> mask,
                              Tensor* probs) const {
  const std::size_t b = h.dim(0), len = h.dim(1), d = config_.d_model;
  const Tensor attended = maybe_dropout(attention(h, layer, mask, probs));
  const Tensor h1 =
      layer_norm(add(h, attended), layer.attn_norm_g, layer.attn_norm_b, kLayerNormEps);
  const Tensor flat = reshape(h1, {b * len, d});
  const Tensor inner = gelu(add_bias(matmul(flat, layer.ff_in_w), layer.ff_in_b));
  const Tensor ff = maybe_dropout(
      reshape(add_bias(matmul(inner, layer.ff_out_w), layer.ff_out_b), {b, len, d}));
  return layer_norm(add(h1, ff), layer.ff_norm_g, layer.ff_norm_b, kLayerNormEps);
}

Tensor Encoder::forward_to_layer(const TokenBatch& tokens, LayerIndex k) const {
  check_layer(k);
  Tensor h = embed(tokens);
  const std::size_t stop = std::min(k.value(), config_.n_layers);
  for (std::size_t i = 0; i < stop; ++i) h = encoder_layer(h, layers_[i], tokens.mask);
  if (k == pooled_layer()) return pool_cls(h);
  return h;
}

Tensor Encoder::forward_from_layer(const Tensor& h, LayerIndex k,
                                   std::span<const std::uint8_t> mask) const {
  check_layer(k);
  if (k == pooled_layer()) {
    if (h.rank() != 2 || h.dim(1) != config_.d_model) {
      fail(ErrorKind::contract, "pooled representation must be [B," +
                                    std::to_string(config_.d_model) + "], got " +
                                    shape_string(h.shape()));
    }
    return h;
  }
  if (h.rank() != 3 || h.dim(2) != config_.d_model ||
      mask.size() != h.dim(0) * h.dim(1)) {
    fail(ErrorKind::contract, "layer " + std::to_string(k.value()) +
                                  " representation must be [B,L," +
                                  std::to_string(config_.d_model) +
                                  "] with a [B,L] mask, got " +
                                  shape_string(h.shape()));
  }
  Tensor out = h;
  for (std::size_t i = k.value(); i < config_.n_layers; ++i) {
    out = encoder_layer(out, layers_[i], mask);
  }
  return pool_cls(out);
}

Tensor Encoder::pool_cls(const Tensor& h) const {
  return tanh(add_bias(matmul(select_position(h, 0), pooler_w_), pooler_b_));
}

Tensor Encoder::classify(const Tensor& sentence) const {
  return add_bias(matmul(sentence, classifier_w_), classifier_b_);
}

Tensor Encoder::forward(const TokenBatch& tokens) const {
  return classify(forward_from_layer(embed(tokens), input_layer(), tokens.mask));
}

Tensor Encoder::attention_probabilities(const TokenBatch& tokens,
                                        std::size_t layer) const {
  require(layer >= 1 && layer <= config_.n_layers, ErrorKind::contract,
          "attention layer must be in [1, n_layers]");
  NoGradGuard no_grad;
  Encoder view = *this;
  view.eval_mode();
  Tensor h = view.embed(tokens);
  Tensor probs;
  for (std::size_t i = 0; i < layer; ++i) {
    h = view.encoder_layer(h, layers_[i], tokens.mask, i + 1 == layer ? &probs : nullptr);
  }
  return probs;
}

// ---------------------------------------------------------------------------
// Checkpoint file
//
//   magic    8 bytes  "MXCKPT01"
//   version  u32      1
//   config   u64 x 7  n_layers d_model n_heads d_ff max_seq_len vocab_size
//                     n_classes, then f64 dropout_rate
//   count    u64      number of tensors
//   tensor   u32 name length, name bytes, u32 rank, u64 dims[rank],
//            f64 values[prod(dims)]
//
// All integers and doubles little-endian.

namespace {

constexpr char kMagic[8] = {'M', 'X', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(ErrorKind::io, "truncated checkpoint");
  return value;
}

}  // namespace

void Encoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  for (std::size_t v : {config_.n_layers, config_.d_model, config_.n_heads,
                        config_.d_ff, config_.max_seq_len, config_.vocab_size,
                        config_.n_classes}) {
    put<std::uint64_t>(out, v);
  }
  put<double>(out, config_.dropout_rate);
  const auto params = parameters();
  put<std::uint64_t>(out, params.size());
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor.rank()));
    for (std::size_t d : p.tensor.shape()) put<std::uint64_t>(out, d);
    const auto v = p.tensor.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) fail(ErrorKind::io, "failed writing checkpoint " + path.string());
}

Encoder Encoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open checkpoint " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::io, path.string() + " is not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    fail(ErrorKind::io, "unsupported checkpoint version " + std::to_string(version));
  }
  Encoder enc;
  EncoderConfig& c = enc.config_;
  c.n_layers = get<std::uint64_t>(in);
  c.d_model = get<std::uint64_t>(in);
  c.n_heads = get<std::uint64_t>(in);
  c.d_ff = get<std::uint64_t>(in);
  c.max_seq_len = get<std::uint64_t>(in);
  c.vocab_size = get<std::uint64_t>(in);
  c.n_classes = get<std::uint64_t>(in);
  c.dropout_rate = get<double>(in);
  c.validate();
  enc.allocate(nullptr);
  auto params = enc.parameters();
  const auto count = get<std::uint64_t>(in);
  if (count != params.size()) {
    fail(ErrorKind::io, "checkpoint holds " + std::to_string(count) +
                            " tensors, expected " + std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != p.name) {
      fail(ErrorKind::io, "checkpoint tensor '" + name + "' where '" + p.name +
                              "' was expected");
    }
    const auto rank = get<std::uint32_t>(in);
    Shape shape(rank);
    for (auto& d : shape) d = get<std::uint64_t>(in);
    if (shape != p.tensor.shape()) {
      fail(ErrorKind::io, "checkpoint tensor " + name + " has shape " +
                              shape_string(shape) + ", expected " +
                              shape_string(p.tensor.shape()));
    }
    auto v = p.tensor.mutable_values();
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) fail(ErrorKind::io, "truncated checkpoint");
  }
  return enc;
}

}  // namespace mixup

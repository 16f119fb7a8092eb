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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "data/dataset.hpp"
#include "mixup/mixup.hpp"
#include "model/encoder.hpp"
#include "test_util.hpp"

using namespace mixup;
using mixup::testing::error_kind;

namespace {

std::vector<double> values_of(const Tensor& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

EncoderConfig small_config(std::size_t layers = 2) {
  EncoderConfig c;
  c.n_layers = layers;
  c.d_model = 8;
  c.n_heads = 2;
  c.d_ff = 16;
  c.max_seq_len = 12;
  c.vocab_size = 20;
  c.n_classes = 2;
  c.dropout_rate = 0.0;
  return c;
}

Batch make_batch(const std::vector<std::vector<std::size_t>>& seqs,
                 const std::vector<std::size_t>& labels, std::size_t n_classes = 2) {
  EncodedDataset data;
  data.sequences = seqs;
  data.labels = labels;
  data.n_classes = n_classes;
  std::vector<std::size_t> rows(seqs.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return collate(data, rows);
}

Batch ragged_batch() {
  return make_batch({{2, 7, 9, 11, 3}, {2, 8, 3}, {2, 15, 6, 19, 12, 14, 3}, {2, 5, 3}},
                    {1, 0, 1, 0});
}

// Kolmogorov-Smirnov statistic against Uniform(0, 1).
double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::abs((i + 1) / n - xs[i]));
    d = std::max(d, std::abs(xs[i] - i / n));
  }
  return d;
}

}  // namespace

TEST_CASE("beta sampling") {
  Rng rng(1);
  SUBCASE("alpha 1 is uniform") {
    std::vector<double> xs(10000);
    double total = 0.0;
    for (double& x : xs) total += (x = sample_lambda(1.0, rng));
    CHECK(ks_uniform(xs) < 0.02);
    CHECK(std::abs(total / 10000 - 0.5) < 0.015);
  }
  SUBCASE("alpha 0.75 variance") {
    std::vector<double> xs(10000);
    double total = 0.0;
    for (double& x : xs) {
      x = sample_lambda(0.75, rng);
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      total += x;
    }
    const double m = total / 10000;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    CHECK(std::abs(ss / 9999 - 1.0 / (4.0 * (2.0 * 0.75 + 1.0))) < 0.01);
  }
  SUBCASE("invalid alpha") {
    CHECK(error_kind([&] { sample_lambda(0.0, rng); }) == ErrorKind::parameter);
    CHECK(error_kind([&] { sample_lambda(-1.0, rng); }) == ErrorKind::parameter);
  }
}

TEST_CASE("pairing") {
  Rng rng(2);
  CHECK(pair_batch(1, rng) == std::vector<std::size_t>{0});
  std::map<std::vector<std::size_t>, int> counts;
  for (int i = 0; i < 10000; ++i) {
    auto p = pair_batch(4, rng);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
    ++counts[p];
  }
  CHECK(counts.size() == 24);
  double chi2 = 0.0;
  for (const auto& [perm, c] : counts) {
    CHECK(std::abs(c / 10000.0 - 1.0 / 24.0) < 0.01);
    chi2 += (c - 10000.0 / 24) * (c - 10000.0 / 24) / (10000.0 / 24);
  }
  CHECK(chi2 < 41.64);  // 99% point of chi-square with 23 degrees of freedom
}

TEST_CASE("interpolation") {
  Rng rng(3);
  auto a = Tensor::from({2, 3}, testing::random_values(6, rng));
  auto b = Tensor::from({2, 3}, testing::random_values(6, rng));
  CHECK(values_of(interpolate(a, b, 1.0)) == values_of(a));
  auto same = values_of(interpolate(a, a, 0.37));
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(same[i] - a.values()[i]) < 1e-15);
  auto half = values_of(interpolate(Tensor::from({2}, {1, 0}), Tensor::from({2}, {0, 1}), 0.5));
  CHECK(half == std::vector<double>{0.5, 0.5});
  CHECK(error_kind([&] { interpolate(a, Tensor::zeros({3, 2}), 0.5); }) == ErrorKind::contract);
  auto labels = interpolate_labels(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 0.25);
  CHECK(labels == std::vector<double>{0.25, 0.75});
}

TEST_CASE("pad_pair") {
  const std::vector<std::size_t> three = {2, 7, 3};
  const std::vector<std::size_t> five = {2, 8, 9, 10, 3};
  SUBCASE("pair with SEP") {
    auto [x1, x2] = pad_pair(three, five, PaddingStrategy::pair, PaddingToken::sep, 0, 64);
    CHECK(x1 == std::vector<std::size_t>{2, 7, 3, 3, 3});
    CHECK(x2 == five);
  }
  SUBCASE("equal lengths") {
    const std::vector<std::size_t> other = {2, 4, 5, 3};
    const std::vector<std::size_t> four = {2, 6, 7, 3};
    auto [x1, x2] = pad_pair(four, other, PaddingStrategy::pair, PaddingToken::pad, 0, 64);
    CHECK(x1 == four);
    CHECK(x2 == other);
  }
  SUBCASE("max") {
    auto [x1, x2] = pad_pair(three, five, PaddingStrategy::max, PaddingToken::unused, 9, 64);
    CHECK(x1.size() == 9);
    CHECK(x2.size() == 9);
    CHECK(x1[8] == Vocab::kUnused);
  }
  SUBCASE("token ids") {
    CHECK(padding_token_id(PaddingToken::sep) == Vocab::kSep);
    CHECK(padding_token_id(PaddingToken::pad) == Vocab::kPad);
    CHECK(padding_token_id(PaddingToken::unused) == Vocab::kUnused);
  }
  SUBCASE("none requires equal lengths") {
    CHECK(error_kind([&] {
            pad_pair(three, five, PaddingStrategy::none, PaddingToken::sep, 0, 64);
          }) == ErrorKind::contract);
  }
  SUBCASE("never beyond the sequence limit") {
    auto [x1, x2] = pad_pair(three, five, PaddingStrategy::max, PaddingToken::sep, 9, 6);
    CHECK(x1.size() == 6);
    CHECK(x2.size() == 6);
  }
}

TEST_CASE("layer sets") {
  CHECK(parse_layer_set("0-3").size() == 4);
  const auto s = parse_layer_set("0,2-4");
  REQUIRE(s.size() == 4);
  CHECK(s[1] == LayerIndex(2));
  CHECK(parse_layer_set(format_layer_set(s)) == s);
  CHECK(error_kind([] { parse_layer_set("3-1"); }) == ErrorKind::parameter);
  CHECK(error_kind([] { parse_layer_set("x"); }) == ErrorKind::parameter);

  Rng rng(4);
  const std::vector<LayerIndex> zero = {LayerIndex(0)};
  const std::vector<LayerIndex> top = {LayerIndex(5)};
  for (int i = 0; i < 100; ++i) {
    CHECK(select_mix_layer(zero, rng) == LayerIndex(0));
    CHECK(select_mix_layer(top, rng) == LayerIndex(5));
  }
  CHECK(error_kind([&] { select_mix_layer({}, rng); }) == ErrorKind::parameter);
  const auto all = parse_layer_set("0-5");
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 10000; ++i) ++counts[select_mix_layer(all, rng).value()];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 10000.0 / 6) * (c - 10000.0 / 6) / (10000.0 / 6);
  CHECK(chi2 < 15.086);  // 99% point, 5 degrees of freedom

  MixupConfig cfg;
  cfg.mode = MixMode::manifold;
  cfg.layer_set = parse_layer_set("0-6");
  CHECK(error_kind([&] { cfg.validate(4); }) == ErrorKind::parameter);
  cfg.alpha = 0.0;
  cfg.layer_set = parse_layer_set("0-5");
  CHECK(error_kind([&] { cfg.validate(4); }) == ErrorKind::parameter);
}

TEST_CASE("lambda 1 reproduces the unmixed loss") {
  Rng init(5);
  Encoder m(small_config(), init);
  const auto batch = ragged_batch();
  const double baseline =
      cross_entropy_soft(m.forward(batch.tokens), batch.one_hot_tensor()).item();
  for (MixMode mode : {MixMode::cls, MixMode::input, MixMode::manifold}) {
    MixupConfig cfg;
    cfg.mode = mode;
    cfg.padding = PaddingStrategy::none;
    cfg.layer_set = parse_layer_set("0-3");
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto random = MixupRandom::from_seed(seed);
      random.lambda_override = 1.0;
      const auto out = mixup_step(m, batch, cfg, random);
      CHECK(out.loss.item() == baseline);
    }
  }
}

TEST_CASE("mode reductions") {
  Rng init(6);
  Encoder m(small_config(), init);
  const auto batch = ragged_batch();
  const std::size_t n = m.config().n_layers;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    MixupConfig manifold;
    manifold.mode = MixMode::manifold;
    MixupConfig cls = manifold;
    cls.mode = MixMode::cls;
    MixupConfig input = manifold;
    input.mode = MixMode::input;

    manifold.layer_set = {LayerIndex(n + 1)};
    auto r1 = MixupRandom::from_seed(seed), r2 = MixupRandom::from_seed(seed);
    CHECK(mixup_step(m, batch, manifold, r1).loss.item() ==
          mixup_step(m, batch, cls, r2).loss.item());

    manifold.layer_set = {LayerIndex(0)};
    auto r3 = MixupRandom::from_seed(seed), r4 = MixupRandom::from_seed(seed);
    CHECK(mixup_step(m, batch, manifold, r3).loss.item() ==
          mixup_step(m, batch, input, r4).loss.item());
  }
}

TEST_CASE("mixed labels are probability rows") {
  Rng init(7);
  Encoder m(small_config(), init);
  const auto batch = ragged_batch();
  MixupConfig cfg;
  cfg.mode = MixMode::input;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto random = MixupRandom::from_seed(seed);
    const auto out = mixup_step(m, batch, cfg, random);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double a = out.batch.mixed_labels[2 * i], b = out.batch.mixed_labels[2 * i + 1];
      CHECK(a >= 0.0);
      CHECK(b >= 0.0);
      CHECK(std::abs(a + b - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("swapping the pairing and lambda gives the same pooled mixes") {
  Rng init(8);
  Encoder m(small_config(), init);
  const auto batch = ragged_batch();
  const std::vector<std::size_t> pairing = {2, 0, 3, 1};
  std::vector<std::size_t> inverse(4);
  for (std::size_t i = 0; i < 4; ++i) inverse[pairing[i]] = i;
  {
    MixupConfig cfg;
    cfg.mode = MixMode::cls;
    auto ra = MixupRandom::from_seed(1);
    ra.lambda_override = 0.3;
    ra.pairing_override = pairing;
    auto rb = MixupRandom::from_seed(1);
    rb.lambda_override = 0.7;
    rb.pairing_override = inverse;
    const auto a = mixup_step(m, batch, cfg, ra).batch;
    const auto b = mixup_step(m, batch, cfg, rb).batch;
    // Row i of a mixes (i, pairing[i]); the same pair is row pairing[i] of b.
    const std::size_t row = a.mixed_repr.size() / 4;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t j = pairing[i];
      for (std::size_t t = 0; t < row; ++t) {
        CHECK(std::abs(a.mixed_repr.values()[i * row + t] - b.mixed_repr.values()[j * row + t]) <
              1e-12);
      }
      for (std::size_t c = 0; c < 2; ++c)
        CHECK(std::abs(a.mixed_labels[i * 2 + c] - b.mixed_labels[j * 2 + c]) < 1e-12);
    }
  }
}

TEST_CASE("manifold symmetry at a hidden layer") {
  // Equal lengths, so primary and partner rows share a mask and the mixed
  // rows of the two orderings coincide.
  Rng init(9);
  Encoder m(small_config(), init);
  const auto batch = make_batch({{2, 7, 9, 3}, {2, 8, 4, 3}, {2, 15, 6, 3}}, {1, 0, 1});
  MixupConfig cfg;
  cfg.mode = MixMode::manifold;
  cfg.layer_set = {LayerIndex(1)};
  auto ra = MixupRandom::from_seed(2);
  ra.lambda_override = 0.25;
  ra.pairing_override = std::vector<std::size_t>{1, 2, 0};
  auto rb = MixupRandom::from_seed(2);
  rb.lambda_override = 0.75;
  rb.pairing_override = std::vector<std::size_t>{2, 0, 1};
  const auto a = mixup_step(m, batch, cfg, ra).batch;
  const auto b = mixup_step(m, batch, cfg, rb).batch;
  const std::vector<std::size_t> pairing = {1, 2, 0};
  const std::size_t row = a.mixed_repr.size() / 3;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t t = 0; t < row; ++t)
      CHECK(std::abs(a.mixed_repr.values()[i * row + t] -
                     b.mixed_repr.values()[pairing[i] * row + t]) < 1e-12);
}

TEST_CASE("gradients reach both operands") {
  Rng init(10);
  Encoder m(small_config(), init);
  // Token 16 only in row 0, token 17 only in row 1.
  const auto batch = make_batch({{2, 16, 9, 3}, {2, 17, 8, 3}}, {1, 0});
  for (MixMode mode : {MixMode::input, MixMode::manifold, MixMode::cls}) {
    MixupConfig cfg;
    cfg.mode = mode;
    cfg.layer_set = {LayerIndex(1)};
    auto random = MixupRandom::from_seed(3);
    random.lambda_override = 0.6;
    random.pairing_override = std::vector<std::size_t>{1, 0};
    for (auto& p : m.parameters()) p.tensor.zero_grad();
    auto out = mixup_step(m, batch, cfg, random);
    out.loss.backward();
    const auto table = m.parameters().front().tensor;
    REQUIRE(table.has_grad());
    double g16 = 0.0, g17 = 0.0;
    for (std::size_t d = 0; d < 8; ++d) {
      g16 += std::abs(table.grad()[16 * 8 + d]);
      g17 += std::abs(table.grad()[17 * 8 + d]);
    }
    CHECK(g16 > 0.0);
    CHECK(g17 > 0.0);
  }
}

TEST_CASE("padding policy") {
  Rng init(11);
  Encoder m(small_config(), init);
  MixupConfig cfg;
  cfg.mode = MixMode::cls;
  CHECK_FALSE(needs_token_padding(cfg, m));
  cfg.mode = MixMode::input;
  CHECK(needs_token_padding(cfg, m));
  cfg.padding = PaddingStrategy::none;
  CHECK_FALSE(needs_token_padding(cfg, m));
  cfg.padding = PaddingStrategy::pair;
  cfg.mode = MixMode::manifold;
  cfg.layer_set = {LayerIndex(3)};
  CHECK_FALSE(needs_token_padding(cfg, m));
  cfg.layer_set = {LayerIndex(1), LayerIndex(3)};
  CHECK(needs_token_padding(cfg, m));

  // Pair padding: the shorter row of each pair gains padding tokens that stay
  // attendable.
  const auto batch = ragged_batch();
  cfg.mode = MixMode::input;
  cfg.padding = PaddingStrategy::pair;
  auto random = MixupRandom::from_seed(4);
  random.lambda_override = 1.0;
  random.pairing_override = std::vector<std::size_t>{1, 0, 3, 2};
  const auto padded = mixup_step(m, batch, cfg, random);
  TokenBatch expect;
  expect.batch = 4;
  expect.length = 7;
  expect.ids = {2, 7, 9, 11, 3, 0, 0,  2, 8, 3, 3, 3, 0, 0,
                2, 15, 6, 19, 12, 14, 3,  2, 5, 3, 3, 3, 3, 3};
  expect.mask = {1, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 0, 0,
                 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  const double direct =
      cross_entropy_soft(m.forward(expect), batch.one_hot_tensor()).item();
  CHECK(padded.loss.item() == direct);
}

// ---------------------------------------------------------------------------
// Straight-line recomputation of a 1-layer, d_model=2 encoder without the
// tensor library.

namespace {

using Params = std::map<std::string, std::vector<double>>;
using Vec = std::vector<double>;

Vec affine(const Vec& x, const Vec& w, const Vec& b) {
  const std::size_t in = x.size(), out = b.size();
  Vec y(out);
  for (std::size_t j = 0; j < out; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) acc += x[i] * w[i * out + j];
    y[j] = acc + b[j];
  }
  return y;
}

Vec norm(const Vec& x, const Vec& g, const Vec& b) {
  double m = 0.0, v = 0.0;
  for (double e : x) m += e;
  m /= x.size();
  for (double e : x) v += (e - m) * (e - m);
  v /= x.size();
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - m) / std::sqrt(v + 1e-12) * g[i] + b[i];
  return y;
}

std::vector<Vec> embed_row(const Params& p, const std::vector<std::size_t>& ids) {
  const auto& tok = p.at("embeddings.token");
  const auto& pos = p.at("embeddings.position");
  std::vector<Vec> h;
  for (std::size_t t = 0; t < ids.size(); ++t)
    h.push_back({tok[ids[t] * 2] + pos[t * 2], tok[ids[t] * 2 + 1] + pos[t * 2 + 1]});
  return h;
}

std::vector<Vec> layer_row(const Params& p, const std::vector<Vec>& h) {
  const std::string a = "layers.0.attention.";
  const std::string f = "layers.0.feed_forward.";
  const std::size_t len = h.size();
  std::vector<Vec> q, k, v;
  for (const auto& x : h) {
    q.push_back(affine(x, p.at(a + "query.weight"), p.at(a + "query.bias")));
    k.push_back(affine(x, p.at(a + "key.weight"), p.at(a + "key.bias")));
    v.push_back(affine(x, p.at(a + "value.weight"), p.at(a + "value.bias")));
  }
  std::vector<Vec> out;
  for (std::size_t i = 0; i < len; ++i) {
    Vec s(len);
    double mx = -1e300;
    for (std::size_t j = 0; j < len; ++j) {
      s[j] = (q[i][0] * k[j][0] + q[i][1] * k[j][1]) / std::sqrt(2.0);
      mx = std::max(mx, s[j]);
    }
    double z = 0.0;
    for (double& e : s) z += (e = std::exp(e - mx));
    Vec ctx = {0.0, 0.0};
    for (std::size_t j = 0; j < len; ++j) {
      ctx[0] += s[j] / z * v[j][0];
      ctx[1] += s[j] / z * v[j][1];
    }
    const Vec attn = affine(ctx, p.at(a + "output.weight"), p.at(a + "output.bias"));
    const Vec h1 = norm({h[i][0] + attn[0], h[i][1] + attn[1]}, p.at(a + "norm.gamma"),
                        p.at(a + "norm.beta"));
    Vec inner = affine(h1, p.at(f + "in.weight"), p.at(f + "in.bias"));
    for (double& e : inner) e = 0.5 * e * (1.0 + std::erf(e / std::sqrt(2.0)));
    const Vec ff = affine(inner, p.at(f + "out.weight"), p.at(f + "out.bias"));
    out.push_back(norm({h1[0] + ff[0], h1[1] + ff[1]}, p.at(f + "norm.gamma"), p.at(f + "norm.beta")));
  }
  return out;
}

Vec head(const Params& p, const Vec& cls) {
  Vec pooled = affine(cls, p.at("pooler.weight"), p.at("pooler.bias"));
  for (double& e : pooled) e = std::tanh(e);
  return affine(pooled, p.at("classifier.weight"), p.at("classifier.bias"));
}

double soft_ce(const Vec& logits, const Vec& target) {
  const double mx = std::max(logits[0], logits[1]);
  const double lse = mx + std::log(std::exp(logits[0] - mx) + std::exp(logits[1] - mx));
  return -(target[0] * (logits[0] - lse) + target[1] * (logits[1] - lse));
}

}  // namespace

TEST_CASE("mixup loss matches a straight-line recomputation") {
  EncoderConfig cfg;
  cfg.n_layers = 1;
  cfg.d_model = 2;
  cfg.n_heads = 1;
  cfg.d_ff = 3;
  cfg.max_seq_len = 4;
  cfg.vocab_size = 6;
  cfg.n_classes = 2;
  cfg.dropout_rate = 0.0;
  Rng init(12);
  Encoder m(cfg, init);
  Params p;
  std::size_t counter = 0;
  for (auto& named : m.parameters()) {
    auto vals = named.tensor.mutable_values();
    for (double& v : vals) v = 0.5 * std::sin(1.3 * static_cast<double>(++counter));
    p[named.name] = std::vector<double>(vals.begin(), vals.end());
  }
  const std::vector<std::vector<std::size_t>> rows = {{2, 5, 3}, {2, 4, 3}};
  const std::vector<Vec> onehot = {{0, 1}, {1, 0}};
  const auto batch = make_batch(rows, {1, 0});
  const double lam = 0.3;

  for (MixMode mode : {MixMode::input, MixMode::manifold, MixMode::cls}) {
    CAPTURE(to_string(mode));
    MixupConfig mc;
    mc.mode = mode;
    mc.layer_set = {LayerIndex(1)};
    mc.padding = PaddingStrategy::none;
    auto random = MixupRandom::from_seed(0);
    random.lambda_override = lam;
    random.pairing_override = std::vector<std::size_t>{1, 0};
    const double got = mixup_step(m, batch, mc, random).loss.item();

    double expect = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const std::size_t j = 1 - i;
      auto hi = embed_row(p, rows[i]);
      auto hj = embed_row(p, rows[j]);
      Vec cls;
      if (mode == MixMode::input) {
        for (std::size_t t = 0; t < hi.size(); ++t)
          for (std::size_t d = 0; d < 2; ++d) hi[t][d] = lam * hi[t][d] + (1 - lam) * hj[t][d];
        cls = layer_row(p, hi)[0];
        const Vec logits = head(p, cls);
        const Vec target = {lam * onehot[i][0] + (1 - lam) * onehot[j][0],
                            lam * onehot[i][1] + (1 - lam) * onehot[j][1]};
        expect += soft_ce(logits, target);
        continue;
      }
      auto li = layer_row(p, hi);
      auto lj = layer_row(p, hj);
      Vec logits;
      if (mode == MixMode::manifold) {
        logits = head(p, {lam * li[0][0] + (1 - lam) * lj[0][0], lam * li[0][1] + (1 - lam) * lj[0][1]});
      } else {
        Vec pi = affine(li[0], p.at("pooler.weight"), p.at("pooler.bias"));
        Vec pj = affine(lj[0], p.at("pooler.weight"), p.at("pooler.bias"));
        Vec mixed(2);
        for (std::size_t d = 0; d < 2; ++d) mixed[d] = lam * std::tanh(pi[d]) + (1 - lam) * std::tanh(pj[d]);
        logits = affine(mixed, p.at("classifier.weight"), p.at("classifier.bias"));
      }
      const Vec target = {lam * onehot[i][0] + (1 - lam) * onehot[j][0],
                          lam * onehot[i][1] + (1 - lam) * onehot[j][1]};
      expect += soft_ce(logits, target);
    }
    expect /= 2.0;
    CHECK(std::abs(got - expect) < 1e-10);
  }
}

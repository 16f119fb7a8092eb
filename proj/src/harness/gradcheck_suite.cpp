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

#include "harness/gradcheck_suite.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <utility>

#include "core/gradcheck.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "data/dataset.hpp"
#include "mixup/mixup.hpp"
#include "model/encoder.hpp"

namespace mixup {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double stddev = 1.0, bool grad = true) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = stddev * rng.normal();
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// Scalar loss with a generic upstream gradient: sum(y * w) for a fixed w.
Tensor project(const Tensor& y, const Tensor& w) { return sum(mul(y, w)); }

struct Case {
  std::string name;
  std::vector<NamedTensor> params;
  LossFunction loss;
};

std::vector<Case> op_cases(Rng& rng) {
  std::vector<Case> cases;
  auto unary = [&](std::string name, Shape shape, std::function<Tensor(const Tensor&)> op) {
    Tensor x = random_tensor(shape, rng);
    Tensor probe = op(x.detach());
    Tensor w = random_tensor(probe.shape(), rng, 1.0, false);
    cases.push_back({std::move(name), {{"x", x}}, [x, w, op] { return project(op(x), w); }});
  };
  auto binary = [&](std::string name, Shape sa, Shape sb,
                    std::function<Tensor(const Tensor&, const Tensor&)> op) {
    Tensor a = random_tensor(sa, rng);
    Tensor b = random_tensor(sb, rng);
    Tensor probe = op(a.detach(), b.detach());
    Tensor w = random_tensor(probe.shape(), rng, 1.0, false);
    cases.push_back({std::move(name), {{"a", a}, {"b", b}},
                     [a, b, w, op] { return project(op(a, b), w); }});
  };

  binary("add", {3, 4}, {3, 4}, [](const Tensor& a, const Tensor& b) { return add(a, b); });
  binary("sub", {3, 4}, {3, 4}, [](const Tensor& a, const Tensor& b) { return sub(a, b); });
  binary("mul", {3, 4}, {3, 4}, [](const Tensor& a, const Tensor& b) { return mul(a, b); });
  unary("scale", {2, 5}, [](const Tensor& x) { return scale(x, -1.7); });
  const double lam = rng.uniform();
  binary("axpby", {2, 3, 2}, {2, 3, 2},
         [lam](const Tensor& a, const Tensor& b) { return axpby(lam, a, 1.0 - lam, b); });
  binary("add_bias", {2, 3, 4}, {4},
         [](const Tensor& a, const Tensor& b) { return add_bias(a, b); });
  binary("matmul", {3, 4}, {4, 2}, [](const Tensor& a, const Tensor& b) { return matmul(a, b); });
  binary("batched_matmul", {2, 3, 4}, {2, 4, 3},
         [](const Tensor& a, const Tensor& b) { return batched_matmul(a, b); });
  binary("batched_matmul_t", {2, 3, 4}, {2, 5, 4},
         [](const Tensor& a, const Tensor& b) { return batched_matmul(a, b, true); });
  unary("reshape", {2, 6}, [](const Tensor& x) { return reshape(x, {3, 4}); });
  unary("permute", {2, 3, 4}, [](const Tensor& x) { return permute(x, {2, 0, 1}); });
  unary("softmax_last", {3, 5}, [](const Tensor& x) { return softmax(x, 1); });
  unary("softmax_first", {3, 5}, [](const Tensor& x) { return softmax(x, 0); });
  {
    Tensor x = random_tensor({2, 3, 6}, rng);
    Tensor g = random_tensor({6}, rng);
    Tensor b = random_tensor({6}, rng);
    Tensor w = random_tensor({2, 3, 6}, rng, 1.0, false);
    cases.push_back({"layer_norm", {{"x", x}, {"gamma", g}, {"beta", b}},
                     [x, g, b, w] { return project(layer_norm(x, g, b, 1e-12), w); }});
  }
  unary("gelu", {3, 4}, [](const Tensor& x) { return gelu(x); });
  unary("tanh", {3, 4}, [](const Tensor& x) { return tanh(x); });
  {
    const std::uint64_t mask_seed = rng.next_u64();
    unary("dropout", {4, 5}, [mask_seed](const Tensor& x) {
      Rng r(mask_seed);
      return dropout(x, 0.3, r);
    });
  }
  {
    Tensor table = random_tensor({7, 3}, rng);
    std::vector<std::size_t> ids = {1, 4, 4, 0, 6, 2};
    Tensor w = random_tensor({2, 3, 3}, rng, 1.0, false);
    cases.push_back({"embedding", {{"table", table}}, [table, ids, w] {
                       return project(embedding(table, ids, {2, 3}), w);
                     }});
  }
  unary("select_position", {2, 4, 3}, [](const Tensor& x) { return select_position(x, 2); });
  {
    // Masked keys followed by softmax, as in attention.
    std::vector<std::uint8_t> key_mask = {1, 1, 0, 1, 1, 1, 1, 0};
    unary("mask_keys", {2, 2, 3, 4}, [key_mask](const Tensor& x) {
      return softmax(mask_keys(x, key_mask), 3);
    });
  }
  unary("sum", {3, 3}, [](const Tensor& x) { return sum(x); });
  unary("mean", {3, 3}, [](const Tensor& x) { return mean(x); });
  {
    Tensor logits = random_tensor({3, 4}, rng, 2.0);
    std::vector<double> t(12);
    for (std::size_t r = 0; r < 3; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < 4; ++c) total += (t[r * 4 + c] = 0.1 + rng.uniform());
      for (std::size_t c = 0; c < 4; ++c) t[r * 4 + c] /= total;
    }
    Tensor target = Tensor::from({3, 4}, t, false);
    cases.push_back({"cross_entropy_soft", {{"logits", logits}},
                     [logits, target] { return cross_entropy_soft(logits, target); }});
  }
  return cases;
}

// Spread initial weights so the check exercises non-trivial activations.
void spread_parameters(const Encoder& model, Rng& rng) {
  for (auto& p : model.parameters()) {
    for (double& v : p.tensor.mutable_values()) v += 0.3 * rng.normal();
  }
}

Batch random_batch(Rng& rng, std::size_t vocab, std::size_t n_classes) {
  EncodedDataset data;
  data.n_classes = n_classes;
  const std::size_t lengths[] = {5, 3, 4};
  for (std::size_t len : lengths) {
    std::vector<std::size_t> seq = {2};
    for (std::size_t i = 2; i < len; ++i) seq.push_back(5 + rng.below(vocab - 5));
    seq.push_back(3);
    data.sequences.push_back(seq);
    data.labels.push_back(rng.below(n_classes));
  }
  return collate(data, {0, 1, 2});
}

}  // namespace

GradCheckSuiteReport run_gradcheck_suite(std::uint64_t seed, std::size_t instances) {
  GradCheckSuiteReport report;
  report.passed = true;
  Rng master(seed);
  for (std::size_t inst = 0; inst < instances; ++inst) {
    Rng rng = master.derive(inst);
    Rng sampler = rng.derive("coords");
    std::vector<Case> cases = op_cases(rng);

    EncoderConfig cfg;
    cfg.n_layers = 2;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.d_ff = 12;
    cfg.max_seq_len = 8;
    cfg.vocab_size = 14;
    cfg.n_classes = 3;
    cfg.dropout_rate = 0.0;
    Rng init = rng.derive("init");
    auto model = std::make_shared<Encoder>(cfg, init);
    spread_parameters(*model, rng);
    const Batch batch = random_batch(rng, cfg.vocab_size, cfg.n_classes);
    std::vector<double> soft(batch.one_hot.size());
    for (std::size_t r = 0; r < batch.size(); ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < cfg.n_classes; ++c)
        total += (soft[r * cfg.n_classes + c] = 0.05 + rng.uniform());
      for (std::size_t c = 0; c < cfg.n_classes; ++c) soft[r * cfg.n_classes + c] /= total;
    }
    const Tensor target = Tensor::from({batch.size(), cfg.n_classes}, soft);
    cases.push_back({"encoder", model->parameters(), [model, batch, target] {
                       return cross_entropy_soft(model->forward(batch.tokens), target);
                     }});

    MixupConfig mix;
    mix.mode = MixMode::manifold;
    mix.layer_set = {LayerIndex(1)};
    mix.padding = PaddingStrategy::pair;
    const double lambda = 0.2 + 0.6 * rng.uniform();
    cases.push_back({"mixup_step", model->parameters(), [model, batch, mix, lambda] {
                       MixupRandom random = MixupRandom::from_seed(7);
                       random.lambda_override = lambda;
                       random.pairing_override = std::vector<std::size_t>{1, 2, 0};
                       return mixup_step(*model, batch, mix, random).loss;
                     }});

    for (auto& c : cases) {
      GradCheckOptions opts;
      opts.coords_per_tensor = 6;
      opts.sampler = &sampler;
      const GradCheckReport r = finite_diff_check(c.loss, c.params, opts);
      GradCheckCase out{c.name + "#" + std::to_string(inst), r.max_rel_error, r.passed};
      report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
      report.passed = report.passed && r.passed;
      report.cases.push_back(std::move(out));
    }
  }
  return report;
}

}  // namespace mixup

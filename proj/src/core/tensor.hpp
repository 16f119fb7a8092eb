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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mixup {

class Rng;

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  // Empty until the first gradient accumulation.
  std::vector<double> grad;
  bool requires_grad = false;
  bool backward_done = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;

  double* grad_data();
};

}  // namespace detail

/// Dense row-major double tensor with tape-style reverse-mode
/// differentiation. Every op returns a fresh node holding its inputs, so a
/// forward pass builds the graph and backward() walks it once.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values().size(); }

  std::span<const double> values() const;
  /// Writable access to the stored values; intended for leaves (parameters
  /// updated by the optimiser, coordinates perturbed by gradient checks).
  std::span<double> mutable_values();
  double item() const;

  bool requires_grad() const;
  bool has_grad() const;
  /// Gradient buffer; empty when no gradient has been accumulated.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Populates grad on every node reachable from this scalar. Calling it a
  /// second time on the same graph without reset_graph() is a state error.
  void backward();
  /// Drops accumulated gradients on the whole reachable graph and re-arms
  /// backward().
  void reset_graph();

  /// Same values, no history.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node)
      : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// While alive, ops on this thread do not record history.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

// Elementwise ops over identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// alpha * a + beta * b.
Tensor axpby(double alpha, const Tensor& a, double beta, const Tensor& b);

/// x[..., d] + bias[d] broadcast over the leading axes.
Tensor add_bias(const Tensor& x, const Tensor& bias);

/// [M,K] x [K,N] -> [M,N].
Tensor matmul(const Tensor& a, const Tensor& b);
/// [G,M,K] x [G,K,N] -> [G,M,N]; with transpose_b, b is [G,N,K].
Tensor batched_matmul(const Tensor& a, const Tensor& b,
                      bool transpose_b = false);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);

/// Softmax along axis with max subtraction. Entries equal to -inf are
/// treated as masked out; NaN, +inf, or an all -inf slice is a numeric error.
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps);
/// Exact erf-based GELU.
Tensor gelu(const Tensor& x);
Tensor tanh(const Tensor& x);
/// Inverted dropout; the keep mask is drawn from rng, one uniform per entry.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

/// Rows of table[V,d] gathered by ids; output shape is ids_shape + [d].
Tensor embedding(const Tensor& table, std::span<const std::size_t> ids,
                 const Shape& ids_shape);
/// x[B,L,...] -> x[B,...] at position index of axis 1.
Tensor select_position(const Tensor& x, std::size_t index);
/// scores[B,H,Lq,Lk]; key positions with key_mask[b,k] == 0 become -inf.
Tensor mask_keys(const Tensor& scores, std::span<const std::uint8_t> key_mask);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Mean over the batch of -sum_k target_k * log_softmax(logits)_k.
/// Target rows must be probability vectors (entries in [0,1], sum 1 +- 1e-9).
Tensor cross_entropy_soft(const Tensor& logits, const Tensor& target);

}  // namespace mixup

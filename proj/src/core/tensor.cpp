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
#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mixup {

namespace {

thread_local bool g_grad_enabled = true;

using NodePtr = std::shared_ptr<detail::Node>;

bool any_requires_grad(std::initializer_list<const Tensor*> inputs) {
  if (!g_grad_enabled) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Creates the result node. History is recorded only when some input needs a
// gradient and recording is enabled.
Tensor make_result(Shape shape, std::vector<double> values,
                   std::initializer_list<const Tensor*> inputs,
                   std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  if (any_requires_grad(inputs)) {
    node->requires_grad = true;
    for (const Tensor* t : inputs) node->parents.push_back(t->node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void check_defined(const Tensor& t, const char* op) {
  require(t.defined(), ErrorKind::contract,
          std::string(op) + ": undefined tensor");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  check_defined(a, op);
  check_defined(b, op);
  if (a.shape() != b.shape()) {
    fail(ErrorKind::dimension, std::string(op) + ": shapes " +
                                   shape_string(a.shape()) + " and " +
                                   shape_string(b.shape()) + " differ");
  }
}

// Parent grad buffer, or nullptr when the parent does not need one.
double* parent_grad(detail::Node& self, std::size_t i) {
  detail::Node& p = *self.parents[i];
  return p.requires_grad ? p.grad_data() : nullptr;
}

}  // namespace

double* detail::Node::grad_data() {
  if (grad.empty()) grad.assign(values.size(), 0.0);
  return grad.data();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    fail(ErrorKind::dimension, "shape " + shape_string(shape) + " holds " +
                                   std::to_string(shape_size(shape)) +
                                   " values, got " +
                                   std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  check_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  require(axis < s.size(), ErrorKind::dimension,
          "axis " + std::to_string(axis) + " out of range for " +
              shape_string(s));
  return s[axis];
}

std::span<const double> Tensor::values() const {
  check_defined(*this, "values");
  return node_->values;
}

std::span<double> Tensor::mutable_values() {
  check_defined(*this, "mutable_values");
  return node_->values;
}

double Tensor::item() const {
  require(size() == 1, ErrorKind::contract,
          "item() on tensor of shape " + shape_string(shape()));
  return node_->values[0];
}

bool Tensor::requires_grad() const {
  return node_ && node_->requires_grad;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  check_defined(*this, "grad");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  check_defined(*this, "mutable_grad");
  node_->grad_data();
  return node_->grad;
}

void Tensor::zero_grad() {
  check_defined(*this, "zero_grad");
  node_->grad.clear();
}

namespace {

std::vector<detail::Node*> topo_order(detail::Node* root) {
  // Iterative post-order DFS; result has parents before children.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

void Tensor::backward() {
  check_defined(*this, "backward");
  require(size() == 1, ErrorKind::contract,
          "backward() needs a scalar loss, got shape " +
              shape_string(shape()));
  require(node_->requires_grad, ErrorKind::contract,
          "backward() on a tensor without recorded history");
  require(!node_->backward_done, ErrorKind::state,
          "backward() already ran on this graph; call reset_graph() first");
  const auto order = topo_order(node_.get());
  node_->grad_data()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  node_->backward_done = true;
}

void Tensor::reset_graph() {
  check_defined(*this, "reset_graph");
  for (detail::Node* n : topo_order(node_.get())) n->grad.clear();
  node_->backward_done = false;
}

Tensor Tensor::detach() const {
  return from(shape(), node_->values, false);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() noexcept { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  return axpby(1.0, a, 1.0, b);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return axpby(1.0, a, -1.0, b);
}

Tensor axpby(double alpha, const Tensor& a, double beta, const Tensor& b) {
  check_same_shape(a, b, "axpby");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  if (alpha == 1.0 && beta == 1.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = alpha * av[i] + beta * bv[i];
    }
  }
  return make_result(a.shape(), std::move(out), {&a, &b},
                     [alpha, beta](detail::Node& self) {
                       const auto& g = self.grad;
                       if (double* ga = parent_grad(self, 0)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           ga[i] += alpha * g[i];
                       }
                       if (double* gb = parent_grad(self, 1)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gb[i] += beta * g[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result(a.shape(), std::move(out), {&a, &b},
                     [](detail::Node& self) {
                       const auto& g = self.grad;
                       const auto& av = self.parents[0]->values;
                       const auto& bv = self.parents[1]->values;
                       if (double* ga = parent_grad(self, 0)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           ga[i] += g[i] * bv[i];
                       }
                       if (double* gb = parent_grad(self, 1)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gb[i] += g[i] * av[i];
                       }
                     });
}

Tensor scale(const Tensor& x, double factor) {
  check_defined(x, "scale");
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor;
  return make_result(x.shape(), std::move(out), {&x},
                     [factor](detail::Node& self) {
                       const auto& g = self.grad;
                       if (double* gx = parent_grad(self, 0)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gx[i] += g[i] * factor;
                       }
                     });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  check_defined(x, "add_bias");
  check_defined(bias, "add_bias");
  const std::size_t d = bias.size();
  if (bias.rank() != 1 || x.rank() == 0 || x.shape().back() != d) {
    fail(ErrorKind::dimension, "add_bias: " + shape_string(x.shape()) +
                                   " with bias " + shape_string(bias.shape()));
  }
  const auto xv = x.values();
  const auto bv = bias.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + bv[i % d];
  return make_result(x.shape(), std::move(out), {&x, &bias},
                     [d](detail::Node& self) {
                       const auto& g = self.grad;
                       if (double* gx = parent_grad(self, 0)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gx[i] += g[i];
                       }
                       if (double* gb = parent_grad(self, 1)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gb[i % d] += g[i];
                       }
                     });
}

// ---------------------------------------------------------------------------
// Products

namespace {

// c[M,N] += a[M,K] * b[K,N]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[M,N] += a[M,K] * b[N,K]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      c[i * n + j] += s;
    }
  }
}

// c[K,N] += a[M,K]^T * b[M,N]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    fail(ErrorKind::dimension, "matmul: cannot multiply " +
                                   shape_string(a.shape()) + " by " +
                                   shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.values().data(), b.values().data(), out.data(), m, k, n);
  return make_result({m, n}, std::move(out), {&a, &b},
                     [m, k, n](detail::Node& self) {
                       const double* g = self.grad.data();
                       const double* av = self.parents[0]->values.data();
                       const double* bv = self.parents[1]->values.data();
                       if (double* ga = parent_grad(self, 0))
                         gemm_nt(g, bv, ga, m, n, k);
                       if (double* gb = parent_grad(self, 1))
                         gemm_tn(av, g, gb, m, k, n);
                     });
}

Tensor batched_matmul(const Tensor& a, const Tensor& b, bool transpose_b) {
  check_defined(a, "batched_matmul");
  check_defined(b, "batched_matmul");
  const bool ok_rank = a.rank() == 3 && b.rank() == 3 && a.dim(0) == b.dim(0);
  const std::size_t inner_b = ok_rank ? (transpose_b ? b.dim(2) : b.dim(1)) : 0;
  if (!ok_rank || a.dim(2) != inner_b) {
    fail(ErrorKind::dimension,
         "batched_matmul: cannot multiply " + shape_string(a.shape()) +
             " by " + shape_string(b.shape()) +
             (transpose_b ? " (transposed)" : ""));
  }
  const std::size_t g = a.dim(0), m = a.dim(1), k = a.dim(2);
  const std::size_t n = transpose_b ? b.dim(1) : b.dim(2);
  std::vector<double> out(g * m * n, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (std::size_t i = 0; i < g; ++i) {
    if (transpose_b) {
      gemm_nt(av + i * m * k, bv + i * n * k, out.data() + i * m * n, m, k, n);
    } else {
      gemm_nn(av + i * m * k, bv + i * k * n, out.data() + i * m * n, m, k, n);
    }
  }
  return make_result(
      {g, m, n}, std::move(out), {&a, &b},
      [g, m, k, n, transpose_b](detail::Node& self) {
        const double* gr = self.grad.data();
        const double* av = self.parents[0]->values.data();
        const double* bv = self.parents[1]->values.data();
        double* ga = parent_grad(self, 0);
        double* gb = parent_grad(self, 1);
        for (std::size_t i = 0; i < g; ++i) {
          const double* gi = gr + i * m * n;
          const double* ai = av + i * m * k;
          if (transpose_b) {
            // C = A B^T with B[n,k]: dA = G B, dB = G^T A
            const double* bi = bv + i * n * k;
            if (ga) gemm_nn(gi, bi, ga + i * m * k, m, n, k);
            if (gb) gemm_tn(gi, ai, gb + i * n * k, m, n, k);
          } else {
            const double* bi = bv + i * k * n;
            if (ga) gemm_nt(gi, bi, ga + i * m * k, m, n, k);
            if (gb) gemm_tn(ai, gi, gb + i * k * n, m, k, n);
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Layout

Tensor reshape(const Tensor& x, Shape shape) {
  check_defined(x, "reshape");
  if (shape_size(shape) != x.size()) {
    fail(ErrorKind::dimension, "reshape: " + shape_string(x.shape()) +
                                   " to " + shape_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result(std::move(shape), std::move(out), {&x},
                     [](detail::Node& self) {
                       const auto& g = self.grad;
                       if (double* gx = parent_grad(self, 0)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gx[i] += g[i];
                       }
                     });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes) {
  check_defined(x, "permute");
  const Shape& in = x.shape();
  const std::size_t r = in.size();
  std::vector<bool> used(r, false);
  bool valid = axes.size() == r;
  for (std::size_t a : axes) {
    if (!valid || a >= r || used[a]) {
      valid = false;
      break;
    }
    used[a] = true;
  }
  require(valid, ErrorKind::dimension,
          "permute: invalid axes for " + shape_string(in));

  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in[i];
  Shape out_shape(r);
  std::vector<std::size_t> src_strides(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = in[axes[i]];
    src_strides[i] = in_strides[axes[i]];
  }
  // Source offset of every destination element.
  const std::size_t n = x.size();
  auto index = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < n; ++dst) {
    (*index)[dst] = src;
    for (std::size_t ax = r; ax-- > 0;) {
      if (++counter[ax] < out_shape[ax]) {
        src += src_strides[ax];
        break;
      }
      src -= src_strides[ax] * (out_shape[ax] - 1);
      counter[ax] = 0;
    }
  }
  const auto xv = x.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[(*index)[i]];
  return make_result(std::move(out_shape), std::move(out), {&x},
                     [index](detail::Node& self) {
                       const auto& g = self.grad;
                       if (double* gx = parent_grad(self, 0)) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gx[(*index)[i]] += g[i];
                       }
                     });
}

// ---------------------------------------------------------------------------
// Nonlinearities

namespace {

struct AxisLayout {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisLayout axis_layout(const Shape& shape, std::size_t axis) {
  AxisLayout l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  l.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  check_defined(x, "softmax");
  require(axis < x.rank(), ErrorKind::dimension,
          "softmax: axis " + std::to_string(axis) + " out of range for " +
              shape_string(x.shape()));
  const AxisLayout l = axis_layout(x.shape(), axis);
  require(l.extent >= 1, ErrorKind::dimension, "softmax: empty axis");
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.extent * l.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < l.extent; ++e) {
        const double v = xv[base + e * l.inner];
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
          fail(ErrorKind::numeric, "softmax: non-finite input");
        }
        mx = std::max(mx, v);
      }
      if (!std::isfinite(mx)) {
        fail(ErrorKind::numeric, "softmax: every entry of a slice is -inf");
      }
      double total = 0.0;
      for (std::size_t e = 0; e < l.extent; ++e) {
        const double ex = std::exp(xv[base + e * l.inner] - mx);
        out[base + e * l.inner] = ex;
        total += ex;
      }
      for (std::size_t e = 0; e < l.extent; ++e) out[base + e * l.inner] /= total;
    }
  }
  return make_result(x.shape(), std::move(out), {&x},
                     [l](detail::Node& self) {
                       double* gx = parent_grad(self, 0);
                       if (!gx) return;
                       const auto& g = self.grad;
                       const auto& y = self.values;
                       for (std::size_t o = 0; o < l.outer; ++o) {
                         for (std::size_t in = 0; in < l.inner; ++in) {
                           const std::size_t base = o * l.extent * l.inner + in;
                           double dot = 0.0;
                           for (std::size_t e = 0; e < l.extent; ++e) {
                             const std::size_t i = base + e * l.inner;
                             dot += g[i] * y[i];
                           }
                           for (std::size_t e = 0; e < l.extent; ++e) {
                             const std::size_t i = base + e * l.inner;
                             gx[i] += y[i] * (g[i] - dot);
                           }
                         }
                       }
                     });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  check_defined(x, "layer_norm");
  require(eps > 0.0, ErrorKind::parameter, "layer_norm: eps must be > 0");
  require(x.rank() >= 1, ErrorKind::dimension, "layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    fail(ErrorKind::dimension, "layer_norm: input " + shape_string(x.shape()) +
                                   " with gamma " +
                                   shape_string(gamma.shape()) + " and beta " +
                                   shape_string(beta.shape()));
  }
  const std::size_t rows = x.size() / d;
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  auto xhat = std::make_shared<std::vector<double>>(xv.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xr[j] - mu) * inv;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = gv[j] * h + bv[j];
    }
  }
  return make_result(
      x.shape(), std::move(out), {&x, &gamma, &beta},
      [d, rows, xhat, inv_std](detail::Node& self) {
        const auto& g = self.grad;
        const auto& gv = self.parents[1]->values;
        double* gx = parent_grad(self, 0);
        double* gg = parent_grad(self, 1);
        double* gb = parent_grad(self, 2);
        const double dd = static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = g.data() + r * d;
          const double* hr = xhat->data() + r * d;
          if (gg || gb) {
            for (std::size_t j = 0; j < d; ++j) {
              if (gg) gg[j] += gr[j] * hr[j];
              if (gb) gb[j] += gr[j];
            }
          }
          if (!gx) continue;
          double sum_dh = 0.0;
          double sum_dh_h = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double dh = gr[j] * gv[j];
            sum_dh += dh;
            sum_dh_h += dh * hr[j];
          }
          const double inv = (*inv_std)[r];
          for (std::size_t j = 0; j < d; ++j) {
            const double dh = gr[j] * gv[j];
            gx[r * d + j] += inv / dd * (dd * dh - sum_dh - hr[j] * sum_dh_h);
          }
        }
      });
}

Tensor gelu(const Tensor& x) {
  check_defined(x, "gelu");
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * std::numbers::sqrt2 / 2.0));
  }
  return make_result(
      x.shape(), std::move(out), {&x}, [](detail::Node& self) {
        double* gx = parent_grad(self, 0);
        if (!gx) return;
        const auto& g = self.grad;
        const auto& xv = self.parents[0]->values;
        const double inv_sqrt_2pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double v = xv[i];
          const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
          const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
          gx[i] += g[i] * (cdf + v * pdf);
        }
      });
}

Tensor tanh(const Tensor& x) {
  check_defined(x, "tanh");
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  return make_result(x.shape(), std::move(out), {&x},
                     [](detail::Node& self) {
                       double* gx = parent_grad(self, 0);
                       if (!gx) return;
                       const auto& g = self.grad;
                       const auto& y = self.values;
                       for (std::size_t i = 0; i < g.size(); ++i)
                         gx[i] += g[i] * (1.0 - y[i] * y[i]);
                     });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  check_defined(x, "dropout");
  require(rate >= 0.0 && rate < 1.0, ErrorKind::parameter,
          "dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  const auto xv = x.values();
  auto factor = std::make_shared<std::vector<double>>(xv.size());
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*factor)[i] = rng.uniform() >= rate ? keep_scale : 0.0;
    out[i] = xv[i] * (*factor)[i];
  }
  return make_result(x.shape(), std::move(out), {&x},
                     [factor](detail::Node& self) {
                       double* gx = parent_grad(self, 0);
                       if (!gx) return;
                       const auto& g = self.grad;
                       for (std::size_t i = 0; i < g.size(); ++i)
                         gx[i] += g[i] * (*factor)[i];
                     });
}

// ---------------------------------------------------------------------------
// Indexing

Tensor embedding(const Tensor& table, std::span<const std::size_t> ids,
                 const Shape& ids_shape) {
  check_defined(table, "embedding");
  require(table.rank() == 2, ErrorKind::dimension,
          "embedding: table must be rank 2, got " +
              shape_string(table.shape()));
  require(shape_size(ids_shape) == ids.size(), ErrorKind::dimension,
          "embedding: ids do not match " + shape_string(ids_shape));
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  for (std::size_t id : ids) {
    if (id >= vocab) {
      fail(ErrorKind::vocabulary, "token id " + std::to_string(id) +
                                      " outside vocabulary of size " +
                                      std::to_string(vocab));
    }
  }
  auto rows = std::make_shared<std::vector<std::size_t>>(ids.begin(), ids.end());
  const auto tv = table.values();
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(tv.data() + ids[i] * d, d, out.data() + i * d);
  }
  Shape shape = ids_shape;
  shape.push_back(d);
  return make_result(std::move(shape), std::move(out), {&table},
                     [rows, d](detail::Node& self) {
                       double* gt = parent_grad(self, 0);
                       if (!gt) return;
                       const auto& g = self.grad;
                       for (std::size_t i = 0; i < rows->size(); ++i) {
                         double* dst = gt + (*rows)[i] * d;
                         for (std::size_t j = 0; j < d; ++j)
                           dst[j] += g[i * d + j];
                       }
                     });
}

Tensor select_position(const Tensor& x, std::size_t index) {
  check_defined(x, "select_position");
  require(x.rank() >= 2 && index < x.dim(1), ErrorKind::dimension,
          "select_position: index " + std::to_string(index) + " for " +
              shape_string(x.shape()));
  const std::size_t b = x.dim(0), l = x.dim(1);
  const std::size_t inner = x.size() / (b * l);
  Shape shape = x.shape();
  shape.erase(shape.begin() + 1);
  const auto xv = x.values();
  std::vector<double> out(b * inner);
  for (std::size_t i = 0; i < b; ++i) {
    std::copy_n(xv.data() + (i * l + index) * inner, inner,
                out.data() + i * inner);
  }
  return make_result(std::move(shape), std::move(out), {&x},
                     [b, l, inner, index](detail::Node& self) {
                       double* gx = parent_grad(self, 0);
                       if (!gx) return;
                       const auto& g = self.grad;
                       for (std::size_t i = 0; i < b; ++i) {
                         double* dst = gx + (i * l + index) * inner;
                         for (std::size_t j = 0; j < inner; ++j)
                           dst[j] += g[i * inner + j];
                       }
                     });
}

Tensor mask_keys(const Tensor& scores, std::span<const std::uint8_t> key_mask) {
  check_defined(scores, "mask_keys");
  require(scores.rank() == 4, ErrorKind::dimension,
          "mask_keys: scores must be [B,H,Lq,Lk], got " +
              shape_string(scores.shape()));
  const std::size_t b = scores.dim(0), h = scores.dim(1), lq = scores.dim(2),
                    lk = scores.dim(3);
  require(key_mask.size() == b * lk, ErrorKind::dimension,
          "mask_keys: mask has " + std::to_string(key_mask.size()) +
              " entries, expected " + std::to_string(b * lk));
  auto keep = std::make_shared<std::vector<std::uint8_t>>(scores.size());
  const auto sv = scores.values();
  std::vector<double> out(sv.size());
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t hq = 0; hq < h * lq; ++hq) {
      for (std::size_t k = 0; k < lk; ++k, ++i) {
        const bool on = key_mask[bi * lk + k] != 0;
        (*keep)[i] = on;
        out[i] = on ? sv[i] : neg_inf;
      }
    }
  }
  return make_result(scores.shape(), std::move(out), {&scores},
                     [keep](detail::Node& self) {
                       double* gs = parent_grad(self, 0);
                       if (!gs) return;
                       const auto& g = self.grad;
                       for (std::size_t i = 0; i < g.size(); ++i)
                         if ((*keep)[i]) gs[i] += g[i];
                     });
}

// ---------------------------------------------------------------------------
// Reductions and losses

Tensor sum(const Tensor& x) {
  check_defined(x, "sum");
  double total = 0.0;
  for (double v : x.values()) total += v;
  return make_result({}, {total}, {&x}, [](detail::Node& self) {
    double* gx = parent_grad(self, 0);
    if (!gx) return;
    const double g = self.grad[0];
    const std::size_t n = self.parents[0]->values.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& x) {
  check_defined(x, "mean");
  require(x.size() > 0, ErrorKind::contract, "mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor cross_entropy_soft(const Tensor& logits, const Tensor& target) {
  check_same_shape(logits, target, "cross_entropy_soft");
  require(logits.rank() == 2 && logits.dim(0) > 0 && logits.dim(1) > 0,
          ErrorKind::dimension,
          "cross_entropy_soft: logits must be [B,K], got " +
              shape_string(logits.shape()));
  const std::size_t b = logits.dim(0), k = logits.dim(1);
  const auto zv = logits.values();
  const auto tv = target.values();
  for (std::size_t i = 0; i < b; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double t = tv[i * k + j];
      if (!(t >= 0.0 && t <= 1.0)) {
        fail(ErrorKind::validation,
             "cross_entropy_soft: target entry outside [0,1] in row " +
                 std::to_string(i));
      }
      row += t;
    }
    if (std::abs(row - 1.0) > 1e-9) {
      fail(ErrorKind::validation,
           "cross_entropy_soft: target row " + std::to_string(i) +
               " sums to " + std::to_string(row));
    }
  }
  auto log_probs = std::make_shared<std::vector<double>>(b * k);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double* z = zv.data() + i * k;
    double mx = z[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z[j]);
    require(std::isfinite(mx), ErrorKind::numeric,
            "cross_entropy_soft: non-finite logits");
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(z[j] - mx);
    const double lse = mx + std::log(s);
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double lp = z[j] - lse;
      (*log_probs)[i * k + j] = lp;
      const double t = tv[i * k + j];
      if (t != 0.0) row -= t * lp;
    }
    total += row;
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  return make_result(
      {}, {total * inv_b}, {&logits, &target},
      [b, k, inv_b, log_probs](detail::Node& self) {
        const double g = self.grad[0] * inv_b;
        const auto& tv = self.parents[1]->values;
        if (double* gz = parent_grad(self, 0)) {
          for (std::size_t i = 0; i < b; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < k; ++j) row += tv[i * k + j];
            for (std::size_t j = 0; j < k; ++j) {
              const std::size_t idx = i * k + j;
              gz[idx] += g * (std::exp((*log_probs)[idx]) * row - tv[idx]);
            }
          }
        }
        if (double* gt = parent_grad(self, 1)) {
          for (std::size_t i = 0; i < b * k; ++i) gt[i] -= g * (*log_probs)[i];
        }
      });
}

}  // namespace mixup

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
#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mixup {

std::vector<std::vector<double>> analytic_gradients(
    const LossFunction& loss, std::vector<NamedTensor>& params) {
  for (auto& p : params) p.tensor.zero_grad();
  Tensor value = loss();
  value.backward();
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (auto& p : params) {
    const auto g = p.tensor.grad();
    if (g.empty()) {
      grads.emplace_back(p.tensor.size(), 0.0);
    } else {
      grads.emplace_back(g.begin(), g.end());
    }
    p.tensor.zero_grad();
  }
  return grads;
}

namespace {

std::vector<std::size_t> pick_coordinates(std::size_t n,
                                          const GradCheckOptions& options) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (options.coords_per_tensor == 0 || options.coords_per_tensor >= n) {
    return all;
  }
  if (options.sampler != nullptr) {
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < options.coords_per_tensor; ++i) {
      const std::size_t j = i + options.sampler->below(n - i);
      std::swap(all[i], all[j]);
    }
  }
  all.resize(options.coords_per_tensor);
  return all;
}

}  // namespace

GradCheckReport compare_with_finite_differences(
    const LossFunction& loss, std::vector<NamedTensor> params,
    const std::vector<std::vector<double>>& analytic,
    const GradCheckOptions& options) {
  require(options.step > 0.0, ErrorKind::parameter,
          "finite difference step must be > 0");
  require(analytic.size() == params.size(), ErrorKind::contract,
          "one analytic gradient buffer per parameter expected");
  GradCheckReport report;
  report.tolerance = options.tolerance;
  NoGradGuard no_grad;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].tensor.mutable_values();
    require(analytic[p].size() == values.size(), ErrorKind::dimension,
            "analytic gradient size mismatch for " + params[p].name);
    for (std::size_t i : pick_coordinates(values.size(), options)) {
      const double original = values[i];
      values[i] = original + options.step;
      const double plus = loss().item();
      values[i] = original - options.step;
      const double minus = loss().item();
      values[i] = original;
      GradCheckEntry e;
      e.name = params[p].name;
      e.index = i;
      e.analytic = analytic[p][i];
      e.numeric = (plus - minus) / (2.0 * options.step);
      e.rel_error =
          std::abs(e.analytic - e.numeric) / std::max(1.0, std::abs(e.analytic));
      if (!std::isfinite(e.rel_error)) {
        e.rel_error = std::numeric_limits<double>::infinity();
      }
      report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
      report.entries.push_back(std::move(e));
    }
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

GradCheckReport finite_diff_check(const LossFunction& loss,
                                  std::vector<NamedTensor> params,
                                  const GradCheckOptions& options) {
  const auto grads = analytic_gradients(loss, params);
  return compare_with_finite_differences(loss, std::move(params), grads,
                                         options);
}

}  // namespace mixup

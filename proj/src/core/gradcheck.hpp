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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace mixup {

class Rng;

struct GradCheckEntry {
  std::string name;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates checked per tensor; 0 checks all of them. When limited,
  /// coordinates are drawn from sampler (or taken from the front when no
  /// sampler is given).
  std::size_t coords_per_tensor = 0;
  Rng* sampler = nullptr;
};

/// Builds a fresh graph from the current parameter values and returns the
/// scalar loss.
using LossFunction = std::function<Tensor()>;

/// Compares reverse-mode gradients against central differences. Relative
/// error per coordinate is |analytic - numeric| / max(1, |analytic|).
GradCheckReport finite_diff_check(const LossFunction& loss,
                                  std::vector<NamedTensor> params,
                                  const GradCheckOptions& options = {});

/// Same comparison against caller-supplied analytic gradients, one buffer
/// per parameter.
GradCheckReport compare_with_finite_differences(
    const LossFunction& loss, std::vector<NamedTensor> params,
    const std::vector<std::vector<double>>& analytic,
    const GradCheckOptions& options = {});

/// Reverse-mode gradients of loss with respect to each parameter.
std::vector<std::vector<double>> analytic_gradients(
    const LossFunction& loss, std::vector<NamedTensor>& params);

}  // namespace mixup

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
#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace mixup {

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment buffers of one parameter tensor.
struct AdamState {
  std::vector<double> first;
  std::vector<double> second;
  std::size_t steps = 0;
};

/// One bias-corrected adaptive-moment update of a single tensor. No weight
/// decay, no schedule. Non-finite gradients are a numeric error.
void adam_step(std::span<double> param, std::span<const double> grad,
               AdamState& state, const AdamSettings& settings);

/// Applies adam_step to a fixed, ordered parameter list.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<NamedTensor> params, AdamSettings settings);

  /// Updates every parameter from its accumulated gradient (missing
  /// gradients count as zero), then clears the gradients.
  void step();
  void zero_grad();
  std::size_t steps() const noexcept { return steps_; }

 private:
  std::vector<NamedTensor> params_;
  std::vector<AdamState> states_;
  AdamSettings settings_;
  std::size_t steps_ = 0;
};

}  // namespace mixup

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

#include "harness/optimizer.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mixup {

void adam_step(std::span<double> param, std::span<const double> grad,
               AdamState& state, const AdamSettings& settings) {
  require(param.size() == grad.size(), ErrorKind::dimension,
          "parameter and gradient sizes differ");
  require(settings.learning_rate > 0.0, ErrorKind::parameter, "learning rate must be > 0");
  for (double g : grad) {
    if (!std::isfinite(g)) fail(ErrorKind::numeric, "non-finite gradient");
  }
  if (state.first.empty()) {
    state.first.assign(param.size(), 0.0);
    state.second.assign(param.size(), 0.0);
  }
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(settings.beta1, t);
  const double c2 = 1.0 - std::pow(settings.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.first[i] = settings.beta1 * state.first[i] + (1.0 - settings.beta1) * grad[i];
    state.second[i] =
        settings.beta2 * state.second[i] + (1.0 - settings.beta2) * grad[i] * grad[i];
    const double m_hat = state.first[i] / c1;
    const double v_hat = state.second[i] / c2;
    param[i] -= settings.learning_rate * m_hat / (std::sqrt(v_hat) + settings.epsilon);
  }
}

AdamOptimizer::AdamOptimizer(std::vector<NamedTensor> params, AdamSettings settings)
    : params_(std::move(params)), states_(params_.size()), settings_(settings) {}

void AdamOptimizer::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].tensor;
    if (p.has_grad()) {
      adam_step(p.mutable_values(), p.grad(), states_[i], settings_);
    } else {
      const std::vector<double> zeros(p.size(), 0.0);
      adam_step(p.mutable_values(), zeros, states_[i], settings_);
    }
  }
  ++steps_;
  zero_grad();
}

void AdamOptimizer::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace mixup

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
#include <string>
#include <vector>

namespace mixup {

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckSuiteReport {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
  double tolerance = 1e-4;
  bool passed = false;
};

/// Central-difference checks (step 1e-5) of every differentiable op, the
/// full encoder + classifier + soft cross-entropy graph, and a MixUp step,
/// repeated over `instances` random draws. Case names carry the instance.
GradCheckSuiteReport run_gradcheck_suite(std::uint64_t seed, std::size_t instances);

}  // namespace mixup

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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "harness/config.hpp"
#include "harness/trainer.hpp"

namespace mixup {

/// A named MixUp policy compared within one experiment.
struct Variant {
  std::string name;
  MixupConfig mixup;
};

/// Builds variants from names: none, cls, input, manifold. Other settings
/// (alpha, layer set, padding) come from base.
std::vector<Variant> variants_from_names(const std::vector<std::string>& names,
                                         const MixupConfig& base);

struct MetricStats {
  double mean = 0.0;
  /// Sample standard deviation / sqrt(#runs); absent with fewer than two runs.
  std::optional<double> standard_error;
  std::size_t runs = 0;
};

MetricStats summarize(const std::vector<double>& values);

struct RunRecord {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  // Best-epoch test metrics.
  double accuracy = 0.0;
  double loss = 0.0;
  double ece = 0.0;
  std::optional<double> mcc;
  std::size_t best_epoch = 0;
  std::uint64_t initial_parameter_hash = 0;
  std::uint64_t batch_order_hash = 0;
};

struct VariantSummary {
  std::string name;
  std::vector<RunRecord> runs;
  MetricStats accuracy;
  MetricStats loss;
  MetricStats ece;
  std::optional<MetricStats> mcc;
  std::size_t failed = 0;
};

struct ExperimentSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<VariantSummary> variants;

  const VariantSummary& variant(const std::string& name) const;
};

struct ExperimentOptions {
  /// Directory for per-run files; nothing is written when empty.
  std::filesystem::path out_dir;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 1;
};

/// Trains every (variant, seed) pair independently on one shared task and
/// aggregates best-epoch test metrics. A failing run is recorded and the
/// remaining runs continue.
ExperimentSummary run_experiment(const TrainConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::vector<Variant>& variants,
                                 const ExperimentOptions& options = {});

/// Input MixUp under every padding option: no padding, then pair and max
/// padding with each padding token.
std::vector<Variant> pad_study_variants(const MixupConfig& base);

/// Tabular summary. With paper_units, loss and ECE are multiplied by 100.
std::string format_summary(const ExperimentSummary& summary, bool paper_units);
void write_summary(const ExperimentSummary& summary, const std::filesystem::path& path,
                   bool paper_units);

}  // namespace mixup

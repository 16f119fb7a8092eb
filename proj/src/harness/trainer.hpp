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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "calib/calibration.hpp"
#include "data/dataset.hpp"
#include "data/vocab.hpp"
#include "harness/config.hpp"
#include "model/encoder.hpp"

namespace mixup {

/// Splits and vocabulary resolved from a config's task spec. Shared
/// read-only by every run of an experiment.
struct PreparedTask {
  Dataset train;
  Dataset dev;
  Dataset test;
  Vocab vocab;
  std::vector<std::string> label_names;
};

PreparedTask prepare_task(const TrainConfig& config);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double test_ece = 0.0;
  double test_nll = 0.0;
  std::optional<double> test_mcc;
  /// Selection metric on the selection split.
  double selection_value = 0.0;
  bool mixup_active = false;
};

struct RunResult {
  TrainConfig config;
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;  // index into epochs
  CalibrationReport best_report;
  SelectionSplit selection_split_used = SelectionSplit::dev;
  std::vector<std::size_t> train_label_histogram;
  std::uint64_t initial_parameter_hash = 0;
  std::uint64_t batch_order_hash = 0;
  /// Parameters at the best epoch.
  std::shared_ptr<const Encoder> best_model;

  const EpochMetrics& best() const { return epochs.at(best_epoch); }
};

/// Mean soft-label loss and calibration report of a model on a dataset,
/// evaluation mode, no MixUp. The model is not modified.
struct Evaluation {
  CalibrationReport report;
  double loss = 0.0;
};

Evaluation evaluate(const Encoder& model, const EncodedDataset& data,
                    std::size_t batch_size = 64);

/// Index of the first maximum.
std::size_t select_best_epoch(const std::vector<double>& values);

/// Trains one seeded run. task may be shared between runs; when null it is
/// prepared from the config.
RunResult train(const TrainConfig& config, const PreparedTask* task = nullptr);

/// Tab-separated curve file: a header row, then one row per epoch.
void emit_curves(const RunResult& run, const std::filesystem::path& path);
std::vector<EpochMetrics> load_curves(const std::filesystem::path& path);
std::string curve_header(bool with_mcc);

/// Writes curves.tsv, report.json, run.json, config.txt, and (when the
/// config asks for it) model.ckpt under dir, each name prefixed by prefix.
void write_run_outputs(const RunResult& run, const std::filesystem::path& dir,
                       const std::string& prefix = "");

/// Full-precision decimal rendering used by every text output.
std::string format_real(double value);

}  // namespace mixup

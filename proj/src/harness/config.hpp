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

#include "data/synthetic.hpp"
#include "mixup/mixup.hpp"
#include "model/encoder.hpp"

namespace mixup {

enum class SelectionMetric { accuracy, mcc };
enum class SelectionSplit { dev, test };

const char* to_string(SelectionMetric metric) noexcept;
const char* to_string(SelectionSplit split) noexcept;

/// Everything that determines one training run. Field names double as the
/// keys of the flat key=value config file.
struct TrainConfig {
  // Optimisation (LR, BS, EP, DR, MSL columns of the hyperparameter table).
  // LR and BS are desk values for a randomly initialised encoder, picked by
  // baseline dev accuracy at 32 training examples.
  double learning_rate = 2e-3;
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  double dropout_rate = 0.1;
  std::size_t max_seq_len = 64;

  MixupConfig mixup;

  // Architecture.
  std::size_t n_layers = 4;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;

  // Data. task is "synthetic:content", "synthetic:syntax", or "dir:<path>"
  // holding train.jsonl, test.jsonl, labels.json, and optionally dev.jsonl.
  std::string task = "synthetic:content";
  std::size_t data_size = 1000;
  std::uint64_t data_seed = 2021;
  std::size_t min_count = 1;
  /// Training examples per run; empty means the full training split.
  std::optional<std::size_t> train_size;

  std::uint64_t seed = 1;
  SelectionMetric selection_metric = SelectionMetric::accuracy;
  SelectionSplit selection_split = SelectionSplit::dev;
  std::size_t eval_batch_size = 64;
  bool save_checkpoint = true;

  /// Replaces every lambda draw; endpoint checks only.
  std::optional<double> force_lambda;

  /// Sets one field from its config-file key. Unknown keys and malformed
  /// values are parameter errors.
  void set(const std::string& key, const std::string& value);
  /// Applies every key=value line of a file ('#' starts a comment).
  void load_file(const std::filesystem::path& path);
  /// Canonical key=value rendering, one per line, sorted by key.
  std::string dump() const;
  void validate() const;

  EncoderConfig encoder_config(std::size_t vocab_size, std::size_t n_classes) const;
  /// First epoch (0-based) that trains with MixUp.
  std::size_t mixup_start_epoch() const;
};

}  // namespace mixup

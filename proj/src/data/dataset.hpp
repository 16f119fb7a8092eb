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
#include <string>
#include <vector>

#include "data/vocab.hpp"
#include "model/encoder.hpp"

namespace mixup {

enum class Split { train, dev, test };

const char* to_string(Split split) noexcept;

struct Example {
  std::string text;
  std::size_t label = 0;

  bool operator==(const Example&) const = default;
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t n_classes = 2;
  Split split = Split::train;

  std::size_t size() const noexcept { return examples.size(); }
  std::vector<std::string> texts() const;
  /// Count of examples per label.
  std::vector<std::size_t> label_histogram() const;
  void validate() const;
};

/// One JSON object per line: {"text": string, "label": integer}.
Dataset load_jsonl(const std::filesystem::path& path, std::size_t n_classes,
                   Split split);
void save_jsonl(const Dataset& dataset, const std::filesystem::path& path);

/// Label-map sidecar: {"labels": [name, ...]}.
std::vector<std::string> load_label_map(const std::filesystem::path& path);
void save_label_map(const std::vector<std::string>& labels,
                    const std::filesystem::path& path);

/// Uniform sample of n examples without replacement, order preserved.
Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed);

/// Token-id form of a dataset.
struct EncodedDataset {
  std::vector<std::vector<std::size_t>> sequences;
  std::vector<std::size_t> labels;
  std::size_t n_classes = 2;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t longest() const;
};

EncodedDataset encode(const Dataset& dataset, const Vocab& vocab,
                      std::size_t max_seq_len);

/// Padded with [PAD]; the mask is true exactly on real-token positions.
struct Batch {
  TokenBatch tokens;
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> labels;
  std::size_t n_classes = 2;
  /// Row-major [batch, n_classes].
  std::vector<double> one_hot;

  std::size_t size() const noexcept { return labels.size(); }
  Tensor one_hot_tensor() const;
};

Batch collate(const EncodedDataset& data, const std::vector<std::size_t>& rows);

/// Shuffled with Rng(seed); the final short batch is kept unless drop_last.
std::vector<Batch> make_batches(const EncodedDataset& data,
                                std::size_t batch_size, std::uint64_t seed,
                                bool drop_last = false);
/// Dataset order, no shuffling.
std::vector<Batch> sequential_batches(const EncodedDataset& data,
                                      std::size_t batch_size);

}  // namespace mixup

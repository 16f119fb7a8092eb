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

#include "data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mixup {

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "unknown";
}

std::vector<std::string> Dataset::texts() const {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.text);
  return out;
}

std::vector<std::size_t> Dataset::label_histogram() const {
  std::vector<std::size_t> counts(n_classes, 0);
  for (const auto& e : examples) ++counts.at(e.label);
  return counts;
}

void Dataset::validate() const {
  require(n_classes >= 2, ErrorKind::validation, "datasets need at least two classes");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    require(examples[i].label < n_classes, ErrorKind::validation,
            "example " + std::to_string(i) + " has label " +
                std::to_string(examples[i].label) + " outside [0, " +
                std::to_string(n_classes) + ")");
    require(!examples[i].text.empty(), ErrorKind::validation,
            "example " + std::to_string(i) + " has empty text");
  }
}

Dataset load_jsonl(const std::filesystem::path& path, std::size_t n_classes,
                   Split split) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open dataset " + path.string());
  Dataset ds;
  ds.n_classes = n_classes;
  ds.split = split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto label = j.at("label").get<long long>();
      if (label < 0) fail(ErrorKind::validation, "negative label");
      ds.examples.push_back({j.at("text").get<std::string>(),
                             static_cast<std::size_t>(label)});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::validation, path.string() + ":" + std::to_string(line_no) +
                                      ": " + e.what());
    }
  }
  ds.validate();
  return ds;
}

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write dataset " + path.string());
  for (const auto& e : dataset.examples) {
    out << nlohmann::json{{"text", e.text}, {"label", e.label}}.dump() << '\n';
  }
  if (!out) fail(ErrorKind::io, "failed writing dataset " + path.string());
}

std::vector<std::string> load_label_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open label map " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    return j.at("labels").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::validation, path.string() + ": " + e.what());
  }
}

void save_label_map(const std::vector<std::string>& labels,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write label map " + path.string());
  out << nlohmann::json{{"labels", labels}}.dump() << '\n';
}

Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  require(n <= dataset.size(), ErrorKind::validation,
          "cannot sample " + std::to_string(n) + " of " +
              std::to_string(dataset.size()) + " examples");
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  Dataset out;
  out.n_classes = dataset.n_classes;
  out.split = dataset.split;
  for (std::size_t i : idx) out.examples.push_back(dataset.examples[i]);
  return out;
}

std::size_t EncodedDataset::longest() const {
  std::size_t m = 0;
  for (const auto& s : sequences) m = std::max(m, s.size());
  return m;
}

EncodedDataset encode(const Dataset& dataset, const Vocab& vocab,
                      std::size_t max_seq_len) {
  EncodedDataset out;
  out.n_classes = dataset.n_classes;
  for (const auto& e : dataset.examples) {
    out.sequences.push_back(tokenize(e.text, vocab, max_seq_len));
    out.labels.push_back(e.label);
  }
  return out;
}

Tensor Batch::one_hot_tensor() const {
  return Tensor::from({size(), n_classes}, one_hot);
}

Batch collate(const EncodedDataset& data, const std::vector<std::size_t>& rows) {
  require(!rows.empty(), ErrorKind::contract, "cannot collate an empty batch");
  Batch b;
  b.n_classes = data.n_classes;
  std::size_t len = 0;
  for (std::size_t r : rows) len = std::max(len, data.sequences.at(r).size());
  b.tokens.batch = rows.size();
  b.tokens.length = len;
  b.tokens.ids.assign(rows.size() * len, Vocab::kPad);
  b.tokens.mask.assign(rows.size() * len, 0);
  b.one_hot.assign(rows.size() * data.n_classes, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& seq = data.sequences[rows[i]];
    for (std::size_t t = 0; t < seq.size(); ++t) {
      b.tokens.ids[i * len + t] = seq[t];
      b.tokens.mask[i * len + t] = 1;
    }
    b.lengths.push_back(seq.size());
    b.labels.push_back(data.labels[rows[i]]);
    b.one_hot[i * data.n_classes + data.labels[rows[i]]] = 1.0;
  }
  return b;
}

namespace {

std::vector<Batch> chunk(const EncodedDataset& data,
                         const std::vector<std::size_t>& order,
                         std::size_t batch_size, bool drop_last) {
  require(batch_size >= 1, ErrorKind::parameter, "batch_size must be >= 1");
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    if (drop_last && end - start < batch_size) break;
    batches.push_back(collate(
        data, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(end))));
  }
  return batches;
}

}  // namespace

std::vector<Batch> make_batches(const EncodedDataset& data,
                                std::size_t batch_size, std::uint64_t seed,
                                bool drop_last) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return chunk(data, order, batch_size, drop_last);
}

std::vector<Batch> sequential_batches(const EncodedDataset& data,
                                      std::size_t batch_size) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return chunk(data, order, batch_size, false);
}

}  // namespace mixup

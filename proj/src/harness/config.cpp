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

#include "harness/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace mixup {

const char* to_string(SelectionMetric metric) noexcept {
  return metric == SelectionMetric::accuracy ? "accuracy" : "mcc";
}

const char* to_string(SelectionSplit split) noexcept {
  return split == SelectionSplit::dev ? "dev" : "test";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    fail(ErrorKind::parameter, key + ": expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(std::stoull(v));
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(ErrorKind::parameter, key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::parameter, key + ": expected true or false, got '" + v + "'");
}

std::string format_double(double d) {
  std::ostringstream out;
  out.precision(17);
  out << d;
  return out.str();
}

}  // namespace

void TrainConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "learning_rate") learning_rate = to_double(key, v);
  else if (key == "batch_size") batch_size = to_size(key, v);
  else if (key == "epochs") epochs = to_size(key, v);
  else if (key == "dropout_rate") dropout_rate = to_double(key, v);
  else if (key == "max_seq_len") max_seq_len = to_size(key, v);
  else if (key == "mixup") mixup.mode = parse_mix_mode(v);
  else if (key == "alpha") mixup.alpha = to_double(key, v);
  else if (key == "layers") mixup.layer_set = parse_layer_set(v);
  else if (key == "padding") mixup.padding = parse_padding_strategy(v);
  else if (key == "pad_token") mixup.padding_token = parse_padding_token(v);
  else if (key == "start_fraction") mixup.start_fraction = to_double(key, v);
  else if (key == "n_layers") n_layers = to_size(key, v);
  else if (key == "d_model") d_model = to_size(key, v);
  else if (key == "n_heads") n_heads = to_size(key, v);
  else if (key == "d_ff") d_ff = to_size(key, v);
  else if (key == "task") task = v;
  else if (key == "data_size") data_size = to_size(key, v);
  else if (key == "data_seed") data_seed = to_size(key, v);
  else if (key == "min_count") min_count = to_size(key, v);
  else if (key == "train_size") {
    if (v == "full") train_size.reset();
    else train_size = to_size(key, v);
  } else if (key == "seed") seed = to_size(key, v);
  else if (key == "selection_metric") {
    if (v == "accuracy") selection_metric = SelectionMetric::accuracy;
    else if (v == "mcc") selection_metric = SelectionMetric::mcc;
    else fail(ErrorKind::parameter, "selection_metric must be accuracy or mcc");
  } else if (key == "selection_split") {
    if (v == "dev") selection_split = SelectionSplit::dev;
    else if (v == "test") selection_split = SelectionSplit::test;
    else fail(ErrorKind::parameter, "selection_split must be dev or test");
  } else if (key == "eval_batch_size") eval_batch_size = to_size(key, v);
  else if (key == "save_checkpoint") save_checkpoint = to_bool(key, v);
  else if (key == "force_lambda") {
    if (v == "none") force_lambda.reset();
    else force_lambda = to_double(key, v);
  } else {
    fail(ErrorKind::parameter, "unknown config key '" + key + "'");
  }
}

void TrainConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::parameter, path.string() + ":" + std::to_string(line_no) +
                                     ": expected key=value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

std::string TrainConfig::dump() const {
  std::map<std::string, std::string> kv{
      {"learning_rate", format_double(learning_rate)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"dropout_rate", format_double(dropout_rate)},
      {"max_seq_len", std::to_string(max_seq_len)},
      {"mixup", to_string(mixup.mode)},
      {"alpha", format_double(mixup.alpha)},
      {"layers", format_layer_set(mixup.layer_set)},
      {"padding", to_string(mixup.padding)},
      {"pad_token", to_string(mixup.padding_token)},
      {"start_fraction", format_double(mixup.start_fraction)},
      {"n_layers", std::to_string(n_layers)},
      {"d_model", std::to_string(d_model)},
      {"n_heads", std::to_string(n_heads)},
      {"d_ff", std::to_string(d_ff)},
      {"task", task},
      {"data_size", std::to_string(data_size)},
      {"data_seed", std::to_string(data_seed)},
      {"min_count", std::to_string(min_count)},
      {"train_size", train_size ? std::to_string(*train_size) : "full"},
      {"seed", std::to_string(seed)},
      {"selection_metric", to_string(selection_metric)},
      {"selection_split", to_string(selection_split)},
      {"eval_batch_size", std::to_string(eval_batch_size)},
      {"save_checkpoint", save_checkpoint ? "true" : "false"},
      {"force_lambda", force_lambda ? format_double(*force_lambda) : "none"},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void TrainConfig::validate() const {
  require(learning_rate > 0.0, ErrorKind::parameter, "learning_rate must be > 0");
  require(epochs >= 1, ErrorKind::parameter, "epochs must be >= 1");
  require(batch_size >= 1 && eval_batch_size >= 1, ErrorKind::parameter,
          "batch sizes must be >= 1");
  require(!train_size || *train_size >= 1, ErrorKind::parameter, "train_size must be >= 1");
  if (force_lambda) {
    require(*force_lambda >= 0.0 && *force_lambda <= 1.0, ErrorKind::parameter,
            "force_lambda must be in [0, 1]");
  }
  encoder_config(1, 2).validate();
  mixup.validate(n_layers);
}

EncoderConfig TrainConfig::encoder_config(std::size_t vocab_size,
                                          std::size_t n_classes) const {
  EncoderConfig c;
  c.n_layers = n_layers;
  c.d_model = d_model;
  c.n_heads = n_heads;
  c.d_ff = d_ff;
  c.max_seq_len = max_seq_len;
  c.vocab_size = vocab_size;
  c.n_classes = n_classes;
  c.dropout_rate = dropout_rate;
  return c;
}

std::size_t TrainConfig::mixup_start_epoch() const {
  return static_cast<std::size_t>(
      std::ceil(mixup.start_fraction * static_cast<double>(epochs)));
}

}  // namespace mixup

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

#include "harness/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "harness/optimizer.hpp"
#include "mixup/mixup.hpp"

namespace mixup {

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

PreparedTask prepare_task(const TrainConfig& config) {
  PreparedTask task;
  const std::string& spec = config.task;
  if (spec.rfind("synthetic:", 0) == 0) {
    const TaskKind kind = parse_task_kind(spec.substr(10));
    TaskSplits splits = synth_task_generate(kind, config.data_size, SynthVocabSpec{},
                                            config.data_seed);
    task.train = std::move(splits.train);
    task.dev = std::move(splits.dev);
    task.test = std::move(splits.test);
    task.label_names = std::move(splits.label_names);
  } else if (spec.rfind("dir:", 0) == 0) {
    const std::filesystem::path dir = spec.substr(4);
    task.label_names = load_label_map(dir / "labels.json");
    const std::size_t k = task.label_names.size();
    task.train = load_jsonl(dir / "train.jsonl", k, Split::train);
    task.test = load_jsonl(dir / "test.jsonl", k, Split::test);
    if (std::filesystem::exists(dir / "dev.jsonl")) {
      task.dev = load_jsonl(dir / "dev.jsonl", k, Split::dev);
    } else {
      task.dev.n_classes = k;
      task.dev.split = Split::dev;
    }
  } else {
    fail(ErrorKind::parameter, "task must be synthetic:<kind> or dir:<path>, got '" +
                                   spec + "'");
  }
  require(task.train.size() > 0 && task.test.size() > 0, ErrorKind::validation,
          "task needs non-empty train and test splits");
  task.vocab = Vocab::build(task.train.texts(), config.min_count);
  return task;
}

Evaluation evaluate(const Encoder& model, const EncodedDataset& data,
                    std::size_t batch_size) {
  require(data.size() > 0, ErrorKind::contract, "cannot evaluate an empty dataset");
  NoGradGuard no_grad;
  Encoder view = model;  // shares parameters, private mode
  view.eval_mode();
  std::vector<PredictionRecord> records;
  records.reserve(data.size());
  double loss_total = 0.0;
  for (const Batch& batch : sequential_batches(data, batch_size)) {
    const Tensor logits = view.forward(batch.tokens);
    loss_total += cross_entropy_soft(logits, batch.one_hot_tensor()).item() *
                  static_cast<double>(batch.size());
    const Tensor probs = softmax(logits, 1);
    const std::size_t k = data.n_classes;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      records.push_back(make_record(probs.values().subspan(i * k, k), batch.labels[i]));
    }
  }
  Evaluation ev;
  ev.report = calibration_report(records);
  ev.loss = loss_total / static_cast<double>(data.size());
  return ev;
}

std::size_t select_best_epoch(const std::vector<double>& values) {
  require(!values.empty(), ErrorKind::contract, "no epochs to select from");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

namespace {

MixupConfig effective_mixup(const TrainConfig& config) {
  MixupConfig m = config.mixup;
  if (m.mode == MixMode::manifold && m.layer_set.empty()) {
    for (std::size_t k = 0; k <= config.n_layers + 1; ++k) m.layer_set.emplace_back(k);
  }
  return m;
}

double selection_value(const Evaluation& ev, SelectionMetric metric) {
  if (metric == SelectionMetric::accuracy) return ev.report.accuracy;
  require(ev.report.mcc.has_value(), ErrorKind::validation,
          "mcc selection needs a binary task");
  return *ev.report.mcc;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

std::uint64_t hash_batches(std::uint64_t h, const std::vector<Batch>& batches) {
  for (const Batch& b : batches) {
    h = fnv1a(b.tokens.ids.data(), b.tokens.ids.size() * sizeof(std::size_t), h);
    h = fnv1a(b.labels.data(), b.labels.size() * sizeof(std::size_t), h);
  }
  return h;
}

}  // namespace

RunResult train(const TrainConfig& input_config, const PreparedTask* shared_task) {
  TrainConfig config = input_config;
  config.mixup = effective_mixup(input_config);
  config.validate();

  std::optional<PreparedTask> own_task;
  if (shared_task == nullptr) own_task = prepare_task(config);
  const PreparedTask& task = shared_task ? *shared_task : *own_task;

  const Rng root(config.seed);
  Rng init_rng = root.derive("init");
  Rng dropout_rng = root.derive("dropout");
  const Rng shuffle_root = root.derive("shuffle");
  MixupRandom mix_random{root.derive("lambda"), root.derive("pairing"),
                         root.derive("layer"), config.force_lambda, std::nullopt};

  const Dataset train_set = config.train_size
                                ? subsample(task.train, *config.train_size,
                                            root.derive("subsample").seed())
                                : task.train;
  const EncodedDataset train_data = encode(train_set, task.vocab, config.max_seq_len);
  const EncodedDataset test_data = encode(task.test, task.vocab, config.max_seq_len);
  const bool use_dev = config.selection_split == SelectionSplit::dev && task.dev.size() > 0;
  const EncodedDataset select_data =
      use_dev ? encode(task.dev, task.vocab, config.max_seq_len) : test_data;

  Encoder encoder(config.encoder_config(task.vocab.size(), task.train.n_classes), init_rng);
  AdamSettings adam;
  adam.learning_rate = config.learning_rate;
  AdamOptimizer optimizer(encoder.parameters(), adam);

  RunResult run;
  run.config = config;
  run.selection_split_used = use_dev ? SelectionSplit::dev : SelectionSplit::test;
  run.train_label_histogram = train_set.label_histogram();
  run.initial_parameter_hash = encoder.parameter_hash();
  run.batch_order_hash = 0xcbf29ce484222325ULL;

  const std::size_t global_max = train_data.longest();
  const std::size_t mix_start = config.mixup_start_epoch();
  std::vector<double> selection;
  double best_value = -std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches =
        make_batches(train_data, config.batch_size, shuffle_root.derive(epoch).seed());
    run.batch_order_hash = hash_batches(run.batch_order_hash, batches);
    const bool mixing = config.mixup.mode != MixMode::none && epoch >= mix_start;

    encoder.train_mode(dropout_rng);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      Tensor loss;
      double lambda = 1.0;
      std::size_t layer = 0;
      if (mixing) {
        auto step = mixup_step(encoder, batch, config.mixup, mix_random, global_max);
        loss = std::move(step.loss);
        lambda = step.batch.lambda;
        layer = step.batch.layer.value();
      } else {
        loss = cross_entropy_soft(encoder.forward(batch.tokens), batch.one_hot_tensor());
      }
      if (!std::isfinite(loss.item())) {
        fail(ErrorKind::numeric, "non-finite training loss at epoch " +
                                     std::to_string(epoch + 1) + ", batch " +
                                     std::to_string(bi) + " (lambda " +
                                     format_real(lambda) + ", layer " +
                                     std::to_string(layer) + ")");
      }
      loss.backward();
      optimizer.step();
      loss_sum += loss.item();
    }
    encoder.eval_mode();

    const Evaluation test_eval = evaluate(encoder, test_data, config.eval_batch_size);
    const Evaluation select_eval =
        use_dev ? evaluate(encoder, select_data, config.eval_batch_size) : test_eval;

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(batches.size());
    m.test_loss = test_eval.loss;
    m.test_accuracy = test_eval.report.accuracy;
    m.test_ece = test_eval.report.ece;
    m.test_nll = test_eval.report.nll;
    m.test_mcc = test_eval.report.mcc;
    m.selection_value = selection_value(select_eval, config.selection_metric);
    m.mixup_active = mixing;
    run.epochs.push_back(m);
    selection.push_back(m.selection_value);

    if (m.selection_value > best_value) {
      best_value = m.selection_value;
      run.best_report = test_eval.report;
      run.best_model = std::make_shared<const Encoder>(encoder.clone());
    }
  }
  run.best_epoch = select_best_epoch(selection);
  return run;
}

// ---------------------------------------------------------------------------
// Files

std::string curve_header(bool with_mcc) {
  std::string h = "epoch\ttrain_loss\ttest_loss\ttest_acc\ttest_ece\ttest_nll";
  if (with_mcc) h += "\ttest_mcc";
  return h;
}

void emit_curves(const RunResult& run, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write curve file " + path.string());
  const bool with_mcc = !run.epochs.empty() && run.epochs.front().test_mcc.has_value();
  out << curve_header(with_mcc) << '\n';
  for (const auto& e : run.epochs) {
    out << e.epoch << '\t' << format_real(e.train_loss) << '\t' << format_real(e.test_loss)
        << '\t' << format_real(e.test_accuracy) << '\t' << format_real(e.test_ece) << '\t'
        << format_real(e.test_nll);
    if (with_mcc) out << '\t' << format_real(e.test_mcc.value_or(0.0));
    out << '\n';
  }
  if (!out) fail(ErrorKind::io, "failed writing curve file " + path.string());
}

std::vector<EpochMetrics> load_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open curve file " + path.string());
  std::string header;
  std::getline(in, header);
  bool with_mcc = false;
  if (header == curve_header(true)) {
    with_mcc = true;
  } else if (header != curve_header(false)) {
    fail(ErrorKind::validation, path.string() + ": unexpected curve header");
  }
  auto parse = [&](const std::string& field) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
      fail(ErrorKind::validation, path.string() + ": bad number '" + field + "'");
    }
    return v;
  };
  std::vector<EpochMetrics> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) f.push_back(cell);
    if (f.size() != (with_mcc ? 7u : 6u)) {
      fail(ErrorKind::validation, path.string() + ": wrong column count");
    }
    EpochMetrics m;
    m.epoch = static_cast<std::size_t>(parse(f[0]));
    m.train_loss = parse(f[1]);
    m.test_loss = parse(f[2]);
    m.test_accuracy = parse(f[3]);
    m.test_ece = parse(f[4]);
    m.test_nll = parse(f[5]);
    if (with_mcc) m.test_mcc = parse(f[6]);
    rows.push_back(m);
  }
  return rows;
}

void write_run_outputs(const RunResult& run, const std::filesystem::path& dir,
                       const std::string& prefix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  emit_curves(run, dir / (prefix + "curves.tsv"));
  write_report(run.best_report, dir / (prefix + "report.json"));

  const auto& best = run.best();
  nlohmann::json meta = {
      {"seed", run.config.seed},
      {"mixup", to_string(run.config.mixup.mode)},
      {"best_epoch", best.epoch},
      {"selection_metric", to_string(run.config.selection_metric)},
      {"selection_split", to_string(run.selection_split_used)},
      {"best_selection_value", best.selection_value},
      {"test_accuracy", best.test_accuracy},
      {"test_loss", best.test_loss},
      {"test_nll", best.test_nll},
      {"test_ece", best.test_ece},
      {"test_mcc", best.test_mcc ? nlohmann::json(*best.test_mcc) : nlohmann::json(nullptr)},
      {"train_label_histogram", run.train_label_histogram},
      {"initial_parameter_hash", hex64(run.initial_parameter_hash)},
      {"batch_order_hash", hex64(run.batch_order_hash)},
  };
  std::ofstream meta_out(dir / (prefix + "run.json"), std::ios::trunc);
  if (!meta_out) fail(ErrorKind::io, "cannot write run metadata in " + dir.string());
  meta_out << meta.dump(2) << '\n';

  std::ofstream cfg_out(dir / (prefix + "config.txt"), std::ios::trunc);
  if (!cfg_out) fail(ErrorKind::io, "cannot write config echo in " + dir.string());
  cfg_out << run.config.dump();

  if (run.config.save_checkpoint && run.best_model) {
    run.best_model->save(dir / (prefix + "model.ckpt"));
  }
}

}  // namespace mixup

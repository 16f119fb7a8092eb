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

#include "mixup/mixup.h"

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "data/dataset.hpp"
#include "data/synthetic.hpp"
#include "data/vocab.hpp"
#include "harness/config.hpp"
#include "harness/experiment.hpp"
#include "harness/gradcheck_suite.hpp"
#include "harness/trainer.hpp"
#include "model/encoder.hpp"

struct mx_config {
  mixup::TrainConfig config;
  std::string dump;
};

struct mx_run {
  mixup::RunResult result;
};

struct mx_summary {
  mixup::ExperimentSummary summary;
  std::string text;
};

struct mx_model {
  mixup::Encoder encoder;
};

namespace {

thread_local std::string last_error;

mx_status status_of(mixup::ErrorKind kind) {
  using mixup::ErrorKind;
  switch (kind) {
    case ErrorKind::dimension: return MX_ERR_DIMENSION;
    case ErrorKind::numeric: return MX_ERR_NUMERIC;
    case ErrorKind::validation: return MX_ERR_VALIDATION;
    case ErrorKind::contract: return MX_ERR_CONTRACT;
    case ErrorKind::state: return MX_ERR_STATE;
    case ErrorKind::parameter: return MX_ERR_PARAMETER;
    case ErrorKind::vocabulary: return MX_ERR_VOCABULARY;
    case ErrorKind::io: return MX_ERR_IO;
  }
  return MX_ERR_INTERNAL;
}

template <typename F>
mx_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MX_OK;
  } catch (const mixup::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MX_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MX_ERR_INTERNAL;
  }
}

mx_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return MX_ERR_NULL;
}

std::vector<std::uint64_t> seed_list(const uint64_t* seeds, size_t n) {
  return std::vector<std::uint64_t>(seeds, seeds + n);
}

}  // namespace

extern "C" {

const char* mx_last_error(void) { return last_error.c_str(); }

const char* mx_status_name(mx_status status) {
  switch (status) {
    case MX_OK: return "ok";
    case MX_ERR_DIMENSION: return "dimension";
    case MX_ERR_NUMERIC: return "numeric";
    case MX_ERR_VALIDATION: return "validation";
    case MX_ERR_CONTRACT: return "contract";
    case MX_ERR_STATE: return "state";
    case MX_ERR_PARAMETER: return "parameter";
    case MX_ERR_VOCABULARY: return "vocabulary";
    case MX_ERR_IO: return "io";
    case MX_ERR_INTERNAL: return "internal";
    case MX_ERR_NULL: return "null";
  }
  return "unknown";
}

const char* mx_version(void) { return "0.1.0"; }

mx_status mx_config_create(mx_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new mx_config(); });
}

void mx_config_destroy(mx_config* config) { delete config; }

mx_status mx_config_set(mx_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { config->config.set(key, value); });
}

mx_status mx_config_load(mx_config* config, const char* path) {
  if (!config) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] { config->config.load_file(path); });
}

mx_status mx_config_dump(const mx_config* config, const char** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto* self = const_cast<mx_config*>(config);
    self->dump = config->config.dump();
    *out = self->dump.c_str();
  });
}

mx_status mx_train(const mx_config* config, mx_run** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto run = std::make_unique<mx_run>();
    run->result = mixup::train(config->config);
    *out = run.release();
  });
}

void mx_run_destroy(mx_run* run) { delete run; }

mx_status mx_run_write(const mx_run* run, const char* dir) {
  if (!run) return null_arg("run");
  if (!dir) return null_arg("dir");
  return guarded([&] { mixup::write_run_outputs(run->result, dir); });
}

mx_status mx_run_epochs(const mx_run* run, size_t* out) {
  if (!run) return null_arg("run");
  if (!out) return null_arg("out");
  *out = run->result.epochs.size();
  return MX_OK;
}

mx_status mx_run_best_epoch(const mx_run* run, size_t* out) {
  if (!run) return null_arg("run");
  if (!out) return null_arg("out");
  *out = run->result.best_epoch;
  return MX_OK;
}

mx_status mx_run_metric(const mx_run* run, size_t epoch, const char* name, double* out) {
  if (!run) return null_arg("run");
  if (!name || !out) return null_arg("name/out");
  return guarded([&] {
    mixup::require(epoch < run->result.epochs.size(), mixup::ErrorKind::parameter,
                   "epoch index out of range");
    const auto& e = run->result.epochs[epoch];
    const std::string metric = name;
    if (metric == "train_loss") *out = e.train_loss;
    else if (metric == "test_loss") *out = e.test_loss;
    else if (metric == "test_acc") *out = e.test_accuracy;
    else if (metric == "test_ece") *out = e.test_ece;
    else if (metric == "test_nll") *out = e.test_nll;
    else if (metric == "test_mcc")
      *out = e.test_mcc ? *e.test_mcc : std::numeric_limits<double>::quiet_NaN();
    else mixup::fail(mixup::ErrorKind::parameter, "unknown metric '" + metric + "'");
  });
}

mx_status mx_experiment(const mx_config* config, const uint64_t* seeds, size_t n_seeds,
                        const char* const* variants, size_t n_variants,
                        const char* out_dir, mx_summary** out) {
  if (!config) return null_arg("config");
  if (!seeds && n_seeds > 0) return null_arg("seeds");
  if (!out) return null_arg("out");
  return guarded([&] {
    std::vector<std::string> names;
    if (variants) {
      for (size_t i = 0; i < n_variants; ++i) {
        mixup::require(variants[i] != nullptr, mixup::ErrorKind::parameter,
                       "null variant name");
        names.emplace_back(variants[i]);
      }
    } else {
      names = {"none", "cls", "input", "manifold"};
    }
    mixup::ExperimentOptions options;
    if (out_dir) options.out_dir = out_dir;
    auto s = std::make_unique<mx_summary>();
    s->summary = mixup::run_experiment(config->config, seed_list(seeds, n_seeds),
                                       mixup::variants_from_names(names, config->config.mixup),
                                       options);
    *out = s.release();
  });
}

mx_status mx_pad_study(const mx_config* config, const uint64_t* seeds, size_t n_seeds,
                       const char* out_dir, mx_summary** out) {
  if (!config) return null_arg("config");
  if (!seeds && n_seeds > 0) return null_arg("seeds");
  if (!out) return null_arg("out");
  return guarded([&] {
    mixup::ExperimentOptions options;
    if (out_dir) options.out_dir = out_dir;
    auto s = std::make_unique<mx_summary>();
    s->summary = mixup::run_experiment(config->config, seed_list(seeds, n_seeds),
                                       mixup::pad_study_variants(config->config.mixup),
                                       options);
    *out = s.release();
  });
}

void mx_summary_destroy(mx_summary* summary) { delete summary; }

mx_status mx_summary_write(const mx_summary* summary, const char* path, int paper_units) {
  if (!summary) return null_arg("summary");
  if (!path) return null_arg("path");
  return guarded([&] { mixup::write_summary(summary->summary, path, paper_units != 0); });
}

mx_status mx_summary_text(const mx_summary* summary, int paper_units, const char** out) {
  if (!summary) return null_arg("summary");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto* self = const_cast<mx_summary*>(summary);
    self->text = mixup::format_summary(summary->summary, paper_units != 0);
    *out = self->text.c_str();
  });
}

mx_status mx_summary_stat(const mx_summary* summary, const char* variant, const char* metric,
                          double* mean, double* se) {
  if (!summary) return null_arg("summary");
  if (!variant || !metric || !mean || !se) return null_arg("variant/metric/mean/se");
  return guarded([&] {
    const auto& v = summary->summary.variant(variant);
    const std::string m = metric;
    const mixup::MetricStats* stats = nullptr;
    if (m == "acc") stats = &v.accuracy;
    else if (m == "loss") stats = &v.loss;
    else if (m == "ece") stats = &v.ece;
    else if (m == "mcc") stats = v.mcc ? &*v.mcc : nullptr;
    else mixup::fail(mixup::ErrorKind::parameter, "unknown metric '" + m + "'");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *mean = stats && stats->runs > 0 ? stats->mean : nan;
    *se = stats && stats->standard_error ? *stats->standard_error : nan;
  });
}

mx_status mx_model_load(const char* checkpoint, mx_model** out) {
  if (!checkpoint) return null_arg("checkpoint");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new mx_model{mixup::Encoder::load(checkpoint)}; });
}

void mx_model_destroy(mx_model* model) { delete model; }

mx_status mx_evaluate_file(const mx_model* model, const char* vocab_path,
                           const char* labels_path, const char* data_path,
                           const char* report_path, double* accuracy) {
  if (!model) return null_arg("model");
  if (!vocab_path || !labels_path || !data_path) return null_arg("path");
  return guarded([&] {
    const auto vocab = mixup::Vocab::load(vocab_path);
    const auto labels = mixup::load_label_map(labels_path);
    const auto& cfg = model->encoder.config();
    mixup::require(labels.size() == cfg.n_classes, mixup::ErrorKind::validation,
                   "label map does not match the checkpoint's class count");
    mixup::require(vocab.size() == cfg.vocab_size, mixup::ErrorKind::vocabulary,
                   "vocabulary does not match the checkpoint's embedding table");
    const auto data = mixup::load_jsonl(data_path, labels.size(), mixup::Split::test);
    const auto encoded = mixup::encode(data, vocab, cfg.max_seq_len);
    const auto eval = mixup::evaluate(model->encoder, encoded);
    if (report_path) mixup::write_report(eval.report, report_path);
    if (accuracy) *accuracy = eval.report.accuracy;
  });
}

mx_status mx_generate_task(const char* kind, size_t size, uint64_t seed, const char* out_dir) {
  if (!kind) return null_arg("kind");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    const auto splits = mixup::synth_task_generate(mixup::parse_task_kind(kind), size,
                                                   mixup::SynthVocabSpec{}, seed);
    const std::filesystem::path dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) mixup::fail(mixup::ErrorKind::io, "cannot create " + dir.string());
    mixup::save_jsonl(splits.train, dir / "train.jsonl");
    mixup::save_jsonl(splits.dev, dir / "dev.jsonl");
    mixup::save_jsonl(splits.test, dir / "test.jsonl");
    mixup::save_label_map(splits.label_names, dir / "labels.json");
  });
}

mx_status mx_probe_task(const char* kind, size_t size, uint64_t seed, double* accuracy) {
  if (!kind) return null_arg("kind");
  if (!accuracy) return null_arg("accuracy");
  return guarded([&] {
    const auto splits = mixup::synth_task_generate(mixup::parse_task_kind(kind), size,
                                                   mixup::SynthVocabSpec{}, seed);
    *accuracy = mixup::bow_probe_accuracy(splits.train, splits.dev);
  });
}

mx_status mx_gradcheck(uint64_t seed, size_t instances, double* max_error, int* passed) {
  if (!max_error || !passed) return null_arg("max_error/passed");
  return guarded([&] {
    const auto report = mixup::run_gradcheck_suite(seed, instances);
    *max_error = report.max_rel_error;
    *passed = report.passed ? 1 : 0;
  });
}

}  // extern "C"

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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixup/mixup.h"

namespace {

// Flags shared by the training subcommands; unset flags leave the config
// (defaults or --config file) untouched.
struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string seeds = "1,2,3,4,5";
  std::string mixup;
  std::optional<double> alpha;
  std::string layers;
  std::string padding;
  std::string pad_token;
  std::string train_size;
  std::optional<double> start_fraction;
  std::string out;
  bool paper_units = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c, bool multi_seed) {
  cmd->add_option("--config", c.config_file, "key=value config file");
  if (multi_seed) {
    cmd->add_option("--seeds", c.seeds, "comma-separated seeds")->capture_default_str();
  } else {
    cmd->add_option("--seed", c.seed, "master seed");
  }
  cmd->add_option("--mixup", c.mixup, "none|cls|input|manifold");
  cmd->add_option("--alpha", c.alpha, "Beta(alpha, alpha) parameter");
  cmd->add_option("--layers", c.layers, "manifold layer set, e.g. 0-5 or 0,2,4");
  cmd->add_option("--padding", c.padding, "none|pair|max");
  cmd->add_option("--pad-token", c.pad_token, "sep|pad|unused");
  cmd->add_option("--train-size", c.train_size, "full or N");
  cmd->add_option("--start-fraction", c.start_fraction, "deferred MixUp start");
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--set", c.overrides, "extra key=value override (repeatable)");
  if (multi_seed) cmd->add_flag("--paper-units", c.paper_units, "report loss and ECE x100");
}

struct Failure {
  std::string message;
};

void check(mx_status s) {
  if (s != MX_OK) {
    throw Failure{mx_last_error()};
  }
}

std::string real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class Config {
 public:
  Config() { check(mx_config_create(&cfg_)); }
  ~Config() { mx_config_destroy(cfg_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  void set(const std::string& key, const std::string& value) {
    check(mx_config_set(cfg_, key.c_str(), value.c_str()));
  }
  mx_config* get() { return cfg_; }

  void apply(const Common& c) {
    if (!c.config_file.empty()) check(mx_config_load(cfg_, c.config_file.c_str()));
    if (c.seed) set("seed", std::to_string(*c.seed));
    if (!c.mixup.empty()) set("mixup", c.mixup);
    if (c.alpha) set("alpha", real(*c.alpha));
    if (!c.layers.empty()) set("layers", c.layers);
    if (!c.padding.empty()) set("padding", c.padding);
    if (!c.pad_token.empty()) set("pad_token", c.pad_token);
    if (!c.train_size.empty()) set("train_size", c.train_size);
    if (c.start_fraction) set("start_fraction", real(*c.start_fraction));
    for (const auto& kv : c.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{"parameter error: --set expects key=value"};
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }

 private:
  mx_config* cfg_ = nullptr;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{"parameter error: bad seed '" + item + "'"};
    }
  }
  if (out.empty()) throw Failure{"parameter error: no seeds given"};
  return out;
}

void print_summary(mx_summary* summary, bool paper_units) {
  const char* text = nullptr;
  check(mx_summary_text(summary, paper_units ? 1 : 0, &text));
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MixUp for transformer text classifiers: training, evaluation, studies"};
  app.require_subcommand(1);

  Common train_opts;
  auto* train = app.add_subcommand("train", "train one model");
  add_common(train, train_opts, false);

  Common exp_opts;
  std::string variants = "none,cls,input,manifold";
  auto* experiment = app.add_subcommand("experiment", "multi-seed variant comparison");
  add_common(experiment, exp_opts, true);
  experiment->add_option("--variants", variants, "comma-separated MixUp modes")
      ->capture_default_str();

  Common pad_opts;
  auto* pad = app.add_subcommand("pad-study", "input MixUp under every padding option");
  add_common(pad, pad_opts, true);

  std::string ckpt, vocab_path, labels_path, data_path, report_path;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on a JSONL file");
  evaluate->add_option("--checkpoint", ckpt)->required();
  evaluate->add_option("--vocab", vocab_path)->required();
  evaluate->add_option("--labels", labels_path)->required();
  evaluate->add_option("--data", data_path)->required();
  evaluate->add_option("--report", report_path, "reliability report JSON");

  std::string kind = "content", gen_out;
  std::size_t size = 1000;
  std::uint64_t gen_seed = 2021;
  bool audit = false;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic task");
  gen->add_option("--task", kind, "content|syntax")->capture_default_str();
  gen->add_option("--size", size)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out)->required();
  gen->add_flag("--audit", audit, "print bag-of-words probe accuracy");

  std::uint64_t gc_seed = 1;
  std::size_t gc_instances = 20;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gc->add_option("--seed", gc_seed)->capture_default_str();
  gc->add_option("--instances", gc_instances)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      Config cfg;
      cfg.apply(train_opts);
      mx_run* run = nullptr;
      check(mx_train(cfg.get(), &run));
      std::unique_ptr<mx_run, void (*)(mx_run*)> guard(run, mx_run_destroy);
      check(mx_run_write(run, train_opts.out.c_str()));
      std::size_t best = 0;
      double acc = 0.0, nll = 0.0, ece = 0.0;
      check(mx_run_best_epoch(run, &best));
      check(mx_run_metric(run, best, "test_acc", &acc));
      check(mx_run_metric(run, best, "test_nll", &nll));
      check(mx_run_metric(run, best, "test_ece", &ece));
      std::cout << "best_epoch\t" << best + 1 << "\ntest_acc\t" << real(acc) << "\ntest_loss\t"
                << real(nll) << "\ntest_ece\t" << real(ece) << '\n';
    } else if (*experiment || *pad) {
      const bool is_pad = pad->parsed();
      Common& opts = is_pad ? pad_opts : exp_opts;
      Config cfg;
      cfg.apply(opts);
      const auto seeds = parse_seeds(opts.seeds);
      mx_summary* summary = nullptr;
      if (is_pad) {
        check(mx_pad_study(cfg.get(), seeds.data(), seeds.size(), opts.out.c_str(), &summary));
      } else {
        std::vector<std::string> names;
        std::stringstream ss(variants);
        for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
        std::vector<const char*> ptrs;
        for (const auto& n : names) ptrs.push_back(n.c_str());
        check(mx_experiment(cfg.get(), seeds.data(), seeds.size(), ptrs.data(), ptrs.size(),
                            opts.out.c_str(), &summary));
      }
      std::unique_ptr<mx_summary, void (*)(mx_summary*)> guard(summary, mx_summary_destroy);
      const auto path = std::filesystem::path(opts.out) / "summary.tsv";
      check(mx_summary_write(summary, path.string().c_str(), opts.paper_units ? 1 : 0));
      print_summary(summary, opts.paper_units);
    } else if (*evaluate) {
      mx_model* model = nullptr;
      check(mx_model_load(ckpt.c_str(), &model));
      std::unique_ptr<mx_model, void (*)(mx_model*)> guard(model, mx_model_destroy);
      double acc = 0.0;
      check(mx_evaluate_file(model, vocab_path.c_str(), labels_path.c_str(), data_path.c_str(),
                             report_path.empty() ? nullptr : report_path.c_str(), &acc));
      std::cout << "accuracy\t" << real(acc) << '\n';
    } else if (*gen) {
      check(mx_generate_task(kind.c_str(), size, gen_seed, gen_out.c_str()));
      if (audit) {
        double acc = 0.0;
        check(mx_probe_task(kind.c_str(), size, gen_seed, &acc));
        std::cout << "bow_probe_accuracy\t" << real(acc) << '\n';
      }
    } else if (*gc) {
      double max_err = 0.0;
      int passed = 0;
      check(mx_gradcheck(gc_seed, gc_instances, &max_err, &passed));
      std::cout << "max_rel_error\t" << real(max_err) << '\n'
                << (passed ? "PASS" : "FAIL") << '\n';
      return passed ? 0 : 1;
    }
  } catch (const Failure& f) {
    std::cerr << "mixup: " << f.message << '\n';
    return 1;
  }
  return 0;
}

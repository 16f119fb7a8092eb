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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when an exact criterion fails or any criterion throws. The directional
// replications (6-8) are statistical claims about seed means; their FAIL
// lines are reported but do not set the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calib/calibration.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "data/dataset.hpp"
#include "harness/experiment.hpp"
#include "harness/gradcheck_suite.hpp"
#include "harness/trainer.hpp"
#include "mixup/mixup.hpp"
#include "model/encoder.hpp"

using namespace mixup;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_out;

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};
// Syntax-task optimisation, chosen like the desk defaults (best baseline dev
// accuracy) but on this task; alpha follows the grammaticality row of the
// hyperparameter table.
constexpr double kSyntaxLearningRate = 5e-4;
constexpr std::size_t kSyntaxBatchSize = 16;
constexpr double kSyntaxAlpha = 0.75;

// ---------------------------------------------------------------------------
// 1. ECE oracle

double brute_force_ece(const std::vector<PredictionRecord>& records) {
  const std::size_t m = 15;
  double total = 0.0;
  for (std::size_t bin = 1; bin <= m; ++bin) {
    const double lo = static_cast<double>(bin - 1) / m, hi = static_cast<double>(bin) / m;
    double count = 0.0, acc = 0.0, conf = 0.0;
    for (const auto& r : records) {
      const bool in = bin == 1 ? r.confidence <= hi : (r.confidence > lo && r.confidence <= hi);
      if (!in) continue;
      count += 1.0;
      acc += r.predicted == r.truth ? 1.0 : 0.0;
      conf += r.confidence;
    }
    if (count > 0) total += count / records.size() * std::abs(acc / count - conf / count);
  }
  return total;
}

Outcome ece_oracle() {
  Rng rng(101);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 1 + rng.below(500), k = 2 + rng.below(3);
    std::vector<PredictionRecord> rs;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(k);
      double z = 0.0;
      for (double& v : p) z += (v = rng.uniform() + 1e-6);
      for (double& v : p) v /= z;
      rs.push_back(make_record(p, rng.below(k)));
    }
    worst = std::max(worst, std::abs(calibration_report(rs).ece - brute_force_ece(rs)));
  }
  const std::vector<PredictionRecord> hand = {
      make_record(std::vector<double>{0.2, 0.8}, 1), make_record(std::vector<double>{0.2, 0.8}, 0)};
  const double h = calibration_report(hand).ece;
  return {worst < 1e-12 && std::abs(h - 0.3) < 1e-15,
          "max |ece - brute force| = " + num(worst) + ", hand case = " + num(h, 17)};
}

// ---------------------------------------------------------------------------
// 2. Calibrated generator

Outcome calibrated_generator() {
  Rng rng(102);
  std::vector<PredictionRecord> rs;
  rs.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    const double p = 0.5 + 0.5 * rng.uniform();
    const std::size_t truth = rng.uniform() < p ? 1 : 0;
    rs.push_back(make_record(std::vector<double>{1.0 - p, p}, truth));
  }
  const double e = calibration_report(rs).ece;
  return {e < 0.02, "ECE = " + num(e) + " at n = 100000"};
}

// ---------------------------------------------------------------------------
// 3. Gradient fidelity

Outcome gradient_fidelity() {
  const auto report = run_gradcheck_suite(103, 20);
  std::string worst_case;
  double worst = -1.0;
  for (const auto& c : report.cases) {
    if (c.max_rel_error > worst) {
      worst = c.max_rel_error;
      worst_case = c.name;
    }
  }
  return {report.passed && report.max_rel_error < 1e-4,
          std::to_string(report.cases.size()) + " checks, max relative error " +
              num(report.max_rel_error) + " (" + worst_case + ")"};
}

// ---------------------------------------------------------------------------
// 4. MixUp algebra

Outcome mixup_algebra() {
  EncoderConfig ec;
  ec.vocab_size = 80;
  ec.dropout_rate = 0.0;
  Rng init(104);
  Encoder model(ec, init);
  Rng rng(1041);
  EncodedDataset data;
  data.n_classes = 2;
  for (int i = 0; i < 16; ++i) {
    std::vector<std::size_t> seq = {Vocab::kCls};
    const std::size_t len = 4 + rng.below(12);
    for (std::size_t t = 0; t < len; ++t) seq.push_back(Vocab::kReserved + rng.below(75));
    seq.push_back(Vocab::kSep);
    data.sequences.push_back(seq);
    data.labels.push_back(rng.below(2));
  }
  std::vector<std::size_t> rows(16);
  for (std::size_t i = 0; i < 16; ++i) rows[i] = i;
  const Batch batch = collate(data, rows);
  const double baseline =
      cross_entropy_soft(model.forward(batch.tokens), batch.one_hot_tensor()).item();

  bool endpoint = true;
  for (MixMode mode : {MixMode::cls, MixMode::input, MixMode::manifold}) {
    MixupConfig mc;
    mc.mode = mode;
    mc.padding = PaddingStrategy::none;
    mc.layer_set = parse_layer_set("0-5");
    for (std::uint64_t s = 0; s < 3; ++s) {
      auto random = MixupRandom::from_seed(s);
      random.lambda_override = 1.0;
      endpoint = endpoint && mixup_step(model, batch, mc, random).loss.item() == baseline;
    }
  }

  double linearity = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> lv(12), y1(12, 0.0), y2(12, 0.0), mixed(12);
    for (double& v : lv) v = -5.0 + 10.0 * rng.uniform();
    for (std::size_t r = 0; r < 4; ++r) {
      y1[r * 3 + rng.below(3)] = 1.0;
      y2[r * 3 + rng.below(3)] = 1.0;
    }
    const double lam = rng.uniform();
    for (std::size_t i = 0; i < 12; ++i) mixed[i] = lam * y1[i] + (1 - lam) * y2[i];
    const auto logits = Tensor::from({4, 3}, lv);
    const double lhs = cross_entropy_soft(logits, Tensor::from({4, 3}, mixed)).item();
    const double rhs = lam * cross_entropy_soft(logits, Tensor::from({4, 3}, y1)).item() +
                       (1 - lam) * cross_entropy_soft(logits, Tensor::from({4, 3}, y2)).item();
    linearity = std::max(linearity, std::abs(lhs - rhs));
  }

  double row_error = 0.0;
  MixupConfig mc;
  mc.mode = MixMode::input;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto random = MixupRandom::from_seed(s);
    const auto out = mixup_step(model, batch, mc, random);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double a = out.batch.mixed_labels[2 * i], b = out.batch.mixed_labels[2 * i + 1];
      if (a < 0 || b < 0) row_error = 1.0;
      row_error = std::max(row_error, std::abs(a + b - 1.0));
    }
  }

  Rng beta_rng(1042);
  std::vector<double> xs(10000);
  for (double& x : xs) x = sample_lambda(1.0, beta_rng);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ks = std::max(ks, std::abs((i + 1) / 10000.0 - xs[i]));
    ks = std::max(ks, std::abs(xs[i] - i / 10000.0));
  }

  return {endpoint && linearity < 1e-9 && row_error < 1e-9 && ks < 0.02,
          std::string("lambda=1 endpoint ") + (endpoint ? "bitwise" : "DIFFERS") +
              ", CE linearity " + num(linearity) + ", label rows " + num(row_error) +
              ", Beta(1,1) KS " + num(ks)};
}

// ---------------------------------------------------------------------------
// 5. Mode reductions

TrainConfig desk_config(std::size_t train_size) {
  TrainConfig c;
  c.train_size = train_size;
  c.save_checkpoint = false;
  return c;
}

bool same_trajectory(const RunResult& a, const RunResult& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    if (a.epochs[e].train_loss != b.epochs[e].train_loss) return false;
    if (a.epochs[e].test_loss != b.epochs[e].test_loss) return false;
  }
  return true;
}

Outcome mode_reductions() {
  TrainConfig base = desk_config(32);
  base.epochs = 3;
  const auto task = prepare_task(base);
  auto run = [&](MixMode mode, std::vector<LayerIndex> layers) {
    TrainConfig c = base;
    c.mixup.mode = mode;
    c.mixup.layer_set = std::move(layers);
    return train(c, &task);
  };
  const std::size_t n = base.n_layers;
  const bool input_ok = same_trajectory(run(MixMode::manifold, {LayerIndex(0)}),
                                        run(MixMode::input, {}));
  const bool cls_ok = same_trajectory(run(MixMode::manifold, {LayerIndex(n + 1)}),
                                      run(MixMode::cls, {}));
  return {input_ok && cls_ok, std::string("S={0} vs input: ") + (input_ok ? "bitwise" : "DIFFERS") +
                                  ", S={n+1} vs cls: " + (cls_ok ? "bitwise" : "DIFFERS")};
}

// ---------------------------------------------------------------------------
// 6-8. Directional replications

std::string table(const ExperimentSummary& s) {
  std::ostringstream out;
  out << "      variant        acc            loss           ece\n";
  for (const auto& v : s.variants) {
    char line[160];
    std::snprintf(line, sizeof line, "      %-13s %.4f±%.4f  %.4f±%.4f  %.4f±%.4f%s\n",
                  v.name.c_str(), v.accuracy.mean, v.accuracy.standard_error.value_or(0.0),
                  v.loss.mean, v.loss.standard_error.value_or(0.0), v.ece.mean,
                  v.ece.standard_error.value_or(0.0),
                  v.failed ? ("  (" + std::to_string(v.failed) + " failed)").c_str() : "");
    out << line;
  }
  return out.str();
}

ExperimentSummary experiment(const TrainConfig& cfg, const std::vector<Variant>& variants,
                             const std::string& name) {
  ExperimentOptions opts;
  opts.out_dir = g_out / name;
  auto s = run_experiment(cfg, kSeeds, variants, opts);
  write_summary(s, opts.out_dir / "summary.tsv", false);
  return s;
}

Outcome low_resource() {
  const TrainConfig cfg = desk_config(32);
  const auto s = experiment(cfg, variants_from_names({"none", "cls", "input", "manifold"}, cfg.mixup),
                            "low_resource");
  const auto& base = s.variant("none");
  bool pass = base.failed == 0;
  std::string why;
  for (const char* name : {"cls", "input", "manifold"}) {
    const auto& v = s.variant(name);
    pass = pass && v.failed == 0;
    if (v.loss.mean > base.loss.mean) {
      pass = false;
      why += std::string(" ") + name + " loss above baseline;";
    }
    if (v.ece.mean > base.ece.mean) {
      pass = false;
      why += std::string(" ") + name + " ECE above baseline;";
    }
  }
  for (const char* name : {"input", "manifold"}) {
    if (s.variant(name).accuracy.mean < base.accuracy.mean - 0.01) {
      pass = false;
      why += std::string(" ") + name + " accuracy more than 1 point below baseline;";
    }
  }
  std::cout << table(s);
  return {pass, "content task, 32 examples, 5 seeds" + (why.empty() ? "" : ":" + why)};
}

double majority_rate(const Dataset& data) {
  const auto counts = data.label_histogram();
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(data.size());
}

Outcome content_vs_syntax() {
  TrainConfig syntax = desk_config(32);
  syntax.train_size.reset();
  syntax.task = "synthetic:syntax";
  syntax.learning_rate = kSyntaxLearningRate;
  syntax.batch_size = kSyntaxBatchSize;
  syntax.mixup.alpha = kSyntaxAlpha;
  // The content side is a reported trend only; it runs at the desk size.
  const TrainConfig content = desk_config(32);
  const auto names = std::vector<std::string>{"cls", "input"};
  const auto ss = experiment(syntax, variants_from_names(names, syntax.mixup), "syntax");
  const auto cs = experiment(content, variants_from_names(names, content.mixup), "content");
  const double s_cls = ss.variant("cls").accuracy.mean, s_in = ss.variant("input").accuracy.mean;
  const double c_cls = cs.variant("cls").accuracy.mean, c_in = cs.variant("input").accuracy.mean;
  std::cout << "      task      cls acc   input acc\n";
  std::printf("      syntax    %.4f    %.4f\n      content   %.4f    %.4f\n", s_cls, s_in, c_cls,
              c_in);
  // A tie at the majority rate says nothing about the ordering.
  const double chance = majority_rate(prepare_task(syntax).test);
  const bool learned = std::max(s_cls, s_in) >= chance + 0.05;
  const bool content_trend = c_in >= c_cls - 0.01;
  // Means of equal correct counts can differ in the last bit.
  return {s_cls >= s_in - 1e-12 && learned && ss.variant("cls").failed == 0 &&
              ss.variant("input").failed == 0,
          "syntax: cls " + num(s_cls) + " vs input " + num(s_in) + " (majority " + num(chance) +
              (learned ? ")" : ", NOT LEARNED)") + "; content trend " +
              (content_trend ? "reverses or ties" : "does not reverse") + " (reported only)"};
}

Outcome padding_study() {
  const TrainConfig cfg = desk_config(64);
  const auto s = experiment(cfg, pad_study_variants(cfg.mixup), "pad_study");
  std::cout << table(s);
  double pair = 0.0, max = 0.0;
  std::size_t failed = 0;
  for (const auto& v : s.variants) {
    failed += v.failed;
    if (v.name.ends_with("/pair")) pair += v.accuracy.mean / 3.0;
    if (v.name.ends_with("/max")) max += v.accuracy.mean / 3.0;
  }
  return {failed == 0 && pair >= max,
          "content task, 64 examples: pair mean accuracy " + num(pair) + " vs max " + num(max) +
              " (SEP pair " + num(s.variant("sep/pair").accuracy.mean) + ", SEP max " +
              num(s.variant("sep/max").accuracy.mean) + ")"};
}

// ---------------------------------------------------------------------------
// 9. Determinism and paired seeds

Outcome determinism() {
  TrainConfig cfg = desk_config(32);
  cfg.epochs = 3;
  cfg.save_checkpoint = true;
  const auto a = g_out / "determinism" / "a";
  const auto b = g_out / "determinism" / "b";
  fs::remove_all(g_out / "determinism");
  write_run_outputs(train(cfg), a);
  write_run_outputs(train(cfg), b);
  std::size_t files = 0;
  bool identical = true;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    identical = identical && slurp(entry.path()) == slurp(b / entry.path().filename());
  }
  TrainConfig variant = cfg;
  variant.mixup.mode = MixMode::manifold;
  const auto base_run = train(cfg);
  const auto var_run = train(variant);
  const bool paired = base_run.initial_parameter_hash == var_run.initial_parameter_hash &&
                      base_run.batch_order_hash == var_run.batch_order_hash;
  return {identical && files >= 5 && paired,
          std::to_string(files) + " files " + (identical ? "byte-identical" : "DIFFER") +
              "; baseline/manifold initial weights and batch order " +
              (paired ? "match" : "DIFFER")};
}

// ---------------------------------------------------------------------------
// 10. Curve emission

Outcome curve_emission() {
  const TrainConfig cfg = desk_config(32);
  const auto dir = g_out / "curves";
  fs::remove_all(dir);
  ExperimentOptions opts;
  opts.out_dir = dir;
  run_experiment(cfg, {1}, variants_from_names({"none", "cls"}, cfg.mixup), opts);
  bool ok = true;
  std::string detail;
  for (const char* name : {"none", "cls"}) {
    TrainConfig c = cfg;
    c.seed = 1;
    c.mixup.mode = parse_mix_mode(name);
    const auto run = train(c);
    const auto path = dir / (std::string(name) + "_seed1_curves.tsv");
    const auto back = load_curves(path);
    bool same = back.size() == cfg.epochs && run.epochs.size() == cfg.epochs;
    for (std::size_t e = 0; same && e < back.size(); ++e) {
      same = back[e].train_loss == run.epochs[e].train_loss &&
             back[e].test_loss == run.epochs[e].test_loss &&
             back[e].test_accuracy == run.epochs[e].test_accuracy &&
             back[e].test_ece == run.epochs[e].test_ece &&
             back[e].test_nll == run.epochs[e].test_nll;
    }
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    same = same && (header == curve_header(false) || header == curve_header(true));
    ok = ok && same;
    detail += std::string(name) + ": " + std::to_string(back.size()) + " rows " +
              (same ? "round-trip exactly" : "MISMATCH") + "; ";
  }
  return {ok, detail + "EP = " + std::to_string(cfg.epochs)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  bool exact;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string out = (fs::temp_directory_path() / "mixup_acceptance").string();
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  app.add_option("--out", out, "directory for run artifacts")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  fs::create_directories(g_out);

  const std::vector<Criterion> criteria = {
      {1, "ECE oracle equivalence", 10, true, ece_oracle},
      {2, "calibrated generator", 10, true, calibrated_generator},
      {3, "gradient fidelity", 120, true, gradient_fidelity},
      {4, "MixUp algebra", 30, true, mixup_algebra},
      {5, "mode reductions", 120, true, mode_reductions},
      {6, "low-resource loss and ECE", 4 * 15 * 60, false, low_resource},
      {7, "content vs syntax", 20 * 60, false, content_vs_syntax},
      {8, "padding study", 15 * 60, false, padding_study},
      {9, "determinism and paired seeds", 5 * 60, true, determinism},
      {10, "curve emission", 0, true, curve_emission},
  };
  const std::set<int> selected(only.begin(), only.end());
  std::ofstream log(g_out / "acceptance.txt", std::ios::trunc);
  auto emit = [&](const std::string& line) {
    std::cout << line << std::flush;
    log << line << std::flush;
  };
  int failures = 0, fatal = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    bool threw = false;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
      threw = true;
    }
    ++ran;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds <= 0 || secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    if (!pass && (c.exact || threw)) ++fatal;
    char timing[64];
    std::snprintf(timing, sizeof timing, " [%.1fs%s]\n", secs, in_time ? "" : ", over budget");
    emit("criterion " + std::to_string(c.id) + (pass ? " PASS  " : " FAIL  ") + c.name + ": " +
         o.detail + timing);
  }
  emit(std::to_string(ran - failures) + " of " + std::to_string(ran) + " criteria passed\n");
  return fatal == 0 ? 0 : 1;
}

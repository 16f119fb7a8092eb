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

#include "harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/error.hpp"

namespace mixup {

std::vector<Variant> variants_from_names(const std::vector<std::string>& names,
                                         const MixupConfig& base) {
  std::vector<Variant> out;
  for (const auto& name : names) {
    Variant v{name, base};
    v.mixup.mode = parse_mix_mode(name);
    out.push_back(std::move(v));
  }
  return out;
}

MetricStats summarize(const std::vector<double>& values) {
  MetricStats s;
  s.runs = values.size();
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.standard_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

const VariantSummary& ExperimentSummary::variant(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  fail(ErrorKind::parameter, "no variant named '" + name + "'");
}

namespace {

std::string run_prefix(const std::string& variant, std::uint64_t seed) {
  std::string safe = variant;
  std::replace(safe.begin(), safe.end(), '/', '-');
  return safe + "_seed" + std::to_string(seed) + "_";
}

}  // namespace

ExperimentSummary run_experiment(const TrainConfig& config,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::vector<Variant>& variants,
                                 const ExperimentOptions& options) {
  require(!seeds.empty(), ErrorKind::parameter, "an experiment needs at least one seed");
  require(!variants.empty(), ErrorKind::parameter, "an experiment needs at least one variant");
  const PreparedTask task = prepare_task(config);
  if (!options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create " + options.out_dir.string());
    task.vocab.save(options.out_dir / "vocab.txt");
  }

  struct Job {
    std::size_t variant;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({v, s});
  }
  std::vector<std::vector<RunRecord>> records(variants.size(),
                                              std::vector<RunRecord>(seeds.size()));
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job job = jobs[j];
      RunRecord& rec = records[job.variant][job.seed];
      rec.seed = seeds[job.seed];
      try {
        TrainConfig cfg = config;
        cfg.seed = seeds[job.seed];
        cfg.mixup = variants[job.variant].mixup;
        const RunResult run = train(cfg, &task);
        const auto& best = run.best();
        rec.ok = true;
        rec.accuracy = best.test_accuracy;
        rec.loss = best.test_nll;
        rec.ece = best.test_ece;
        rec.mcc = best.test_mcc;
        rec.best_epoch = best.epoch;
        rec.initial_parameter_hash = run.initial_parameter_hash;
        rec.batch_order_hash = run.batch_order_hash;
        if (!options.out_dir.empty()) {
          std::lock_guard<std::mutex> lock(io_mutex);
          write_run_outputs(run, options.out_dir,
                            run_prefix(variants[job.variant].name, rec.seed));
        }
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
    }
  };
  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency()
                                             : options.threads;
  threads = std::clamp<std::size_t>(threads, 1, jobs.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentSummary summary;
  summary.seeds = seeds;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    VariantSummary vs;
    vs.name = variants[v].name;
    vs.runs = records[v];
    std::vector<double> acc, loss, ece, mcc;
    bool all_mcc = true;
    for (const auto& r : vs.runs) {
      if (!r.ok) {
        ++vs.failed;
        continue;
      }
      acc.push_back(r.accuracy);
      loss.push_back(r.loss);
      ece.push_back(r.ece);
      if (r.mcc) mcc.push_back(*r.mcc);
      else all_mcc = false;
    }
    vs.accuracy = summarize(acc);
    vs.loss = summarize(loss);
    vs.ece = summarize(ece);
    if (all_mcc && !mcc.empty()) vs.mcc = summarize(mcc);
    summary.variants.push_back(std::move(vs));
  }
  return summary;
}

std::vector<Variant> pad_study_variants(const MixupConfig& base) {
  std::vector<Variant> out;
  Variant none{"nopad", base};
  none.mixup.mode = MixMode::input;
  none.mixup.padding = PaddingStrategy::none;
  out.push_back(none);
  for (PaddingStrategy s : {PaddingStrategy::pair, PaddingStrategy::max}) {
    for (PaddingToken t : {PaddingToken::unused, PaddingToken::sep, PaddingToken::pad}) {
      Variant v{std::string(to_string(t)) + "/" + to_string(s), base};
      v.mixup.mode = MixMode::input;
      v.mixup.padding = s;
      v.mixup.padding_token = t;
      out.push_back(v);
    }
  }
  return out;
}

std::string format_summary(const ExperimentSummary& summary, bool paper_units) {
  const double scale = paper_units ? 100.0 : 1.0;
  auto cell = [](const std::optional<MetricStats>& s, double factor) -> std::string {
    if (!s || s->runs == 0) return "NA\tNA";
    return format_real(s->mean * factor) + "\t" +
           (s->standard_error ? format_real(*s->standard_error * factor) : "NA");
  };
  std::ostringstream out;
  out << "variant\truns\tfailed\tacc_mean\tacc_se\tloss_mean\tloss_se\tece_mean\tece_se"
         "\tmcc_mean\tmcc_se\n";
  for (const auto& v : summary.variants) {
    out << v.name << '\t' << v.accuracy.runs << '\t' << v.failed << '\t'
        << cell(v.accuracy, 1.0) << '\t' << cell(v.loss, scale) << '\t'
        << cell(v.ece, scale) << '\t' << cell(v.mcc, 1.0) << '\n';
  }
  return out.str();
}

void write_summary(const ExperimentSummary& summary, const std::filesystem::path& path,
                   bool paper_units) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write summary " + path.string());
  out << format_summary(summary, paper_units);
  if (!out) fail(ErrorKind::io, "failed writing summary " + path.string());
}

}  // namespace mixup

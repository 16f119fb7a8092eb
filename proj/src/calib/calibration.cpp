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

#include "calib/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "core/error.hpp"

namespace mixup {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr const char* kReportSchema = "mixup.reliability/1";

}  // namespace

PredictionRecord make_record(std::span<const double> probabilities,
                             std::size_t truth) {
  require(!probabilities.empty(), ErrorKind::validation, "empty probability vector");
  require(truth < probabilities.size(), ErrorKind::validation,
          "true class outside the probability vector");
  double total = 0.0;
  for (double p : probabilities) {
    require(p >= 0.0 && p <= 1.0, ErrorKind::validation, "probability outside [0,1]");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorKind::validation,
          "probability vector sums to " + std::to_string(total));
  PredictionRecord r;
  const auto best = std::max_element(probabilities.begin(), probabilities.end());
  r.predicted = static_cast<std::size_t>(best - probabilities.begin());
  r.confidence = *best;
  r.truth = truth;
  r.probabilities.assign(probabilities.begin(), probabilities.end());
  return r;
}

std::size_t bin_index(double confidence, std::size_t bins) {
  require(bins >= 1, ErrorKind::parameter, "at least one bin is required");
  require(confidence >= 0.0 && confidence <= 1.0, ErrorKind::validation,
          "confidence " + std::to_string(confidence) + " outside [0,1]");
  const double m_count = static_cast<double>(bins);
  auto m = static_cast<std::size_t>(std::ceil(confidence * m_count));
  m = std::clamp<std::size_t>(m, 1, bins);
  // Snap against rounding in confidence * M so the interval test is exact.
  while (m > 1 && confidence <= static_cast<double>(m - 1) / m_count) --m;
  while (m < bins && confidence > static_cast<double>(m) / m_count) ++m;
  return m - 1;
}

std::vector<CalibrationBin> bin_predictions(std::span<const PredictionRecord> records,
                                            std::size_t bins) {
  require(bins >= 1, ErrorKind::parameter, "at least one bin is required");
  std::vector<CalibrationBin> out(bins);
  std::vector<double> correct(bins, 0.0), conf(bins, 0.0);
  for (std::size_t m = 0; m < bins; ++m) {
    out[m].lower = static_cast<double>(m) / static_cast<double>(bins);
    out[m].upper = static_cast<double>(m + 1) / static_cast<double>(bins);
  }
  for (const auto& r : records) {
    const std::size_t m = bin_index(r.confidence, bins);
    ++out[m].count;
    correct[m] += r.correct() ? 1.0 : 0.0;
    conf[m] += r.confidence;
  }
  for (std::size_t m = 0; m < bins; ++m) {
    if (out[m].count == 0) continue;
    const double n = static_cast<double>(out[m].count);
    out[m].accuracy = correct[m] / n;
    out[m].confidence = conf[m] / n;
  }
  return out;
}

double ece(std::span<const CalibrationBin> bins, std::size_t n) {
  require(n > 0, ErrorKind::contract, "ECE of zero samples");
  std::size_t total = 0;
  double e = 0.0;
  for (const auto& b : bins) {
    total += b.count;
    if (b.count == 0) continue;
    e += static_cast<double>(b.count) / static_cast<double>(n) *
         std::abs(*b.accuracy - *b.confidence);
  }
  require(total == n, ErrorKind::contract,
          "bin counts sum to " + std::to_string(total) + ", expected " + std::to_string(n));
  return e;
}

double nll(std::span<const PredictionRecord> records, std::size_t* clamped) {
  require(!records.empty(), ErrorKind::contract, "NLL of zero samples");
  double total = 0.0;
  for (const auto& r : records) {
    double p = r.probabilities.at(r.truth);
    if (p < kProbabilityFloor) {
      p = kProbabilityFloor;
      if (clamped != nullptr) ++*clamped;
    }
    total -= std::log(p);
  }
  return total / static_cast<double>(records.size());
}

double accuracy(std::span<const PredictionRecord> records) {
  require(!records.empty(), ErrorKind::contract, "accuracy of zero samples");
  std::size_t hits = 0;
  for (const auto& r : records) hits += r.correct() ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mcc(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
  require(predictions.size() == labels.size() && !labels.empty(), ErrorKind::contract,
          "mcc needs equally sized, non-empty prediction and label lists");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(predictions[i] <= 1 && labels[i] <= 1, ErrorKind::validation,
            "mcc is defined for binary labels only");
    if (predictions[i] == 1) {
      (labels[i] == 1 ? tp : fp) += 1;
    } else {
      (labels[i] == 1 ? fn : tn) += 1;
    }
  }
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

CalibrationReport calibration_report(std::span<const PredictionRecord> records,
                                     std::size_t bins) {
  require(!records.empty(), ErrorKind::contract, "calibration report of zero samples");
  CalibrationReport rep;
  rep.n = records.size();
  rep.bins = bin_predictions(records, bins);
  rep.ece = ece(rep.bins, rep.n);
  rep.nll = nll(records, &rep.clamped);
  rep.accuracy = accuracy(records);
  const bool binary = std::all_of(records.begin(), records.end(), [](const auto& r) {
    return r.probabilities.size() == 2;
  });
  if (binary) {
    std::vector<std::size_t> pred, truth;
    for (const auto& r : records) {
      pred.push_back(r.predicted);
      truth.push_back(r.truth);
    }
    rep.mcc = mcc(pred, truth);
  }
  return rep;
}

std::string report_to_json(const CalibrationReport& report) {
  using nlohmann::json;
  json bins = json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"accuracy", b.accuracy ? json(*b.accuracy) : json(nullptr)},
                    {"confidence", b.confidence ? json(*b.confidence) : json(nullptr)}});
  }
  json j = {{"schema", kReportSchema},
            {"bins", bins},
            {"ece", report.ece},
            {"nll", report.nll},
            {"accuracy", report.accuracy},
            {"mcc", report.mcc ? json(*report.mcc) : json(nullptr)},
            {"n", report.n}};
  return j.dump(2);
}

CalibrationReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<std::string>() != kReportSchema) {
      fail(ErrorKind::validation, "unsupported report schema");
    }
    CalibrationReport rep;
    for (const auto& b : j.at("bins")) {
      CalibrationBin bin;
      bin.lower = b.at("lower").get<double>();
      bin.upper = b.at("upper").get<double>();
      bin.count = b.at("count").get<std::size_t>();
      if (!b.at("accuracy").is_null()) bin.accuracy = b.at("accuracy").get<double>();
      if (!b.at("confidence").is_null()) bin.confidence = b.at("confidence").get<double>();
      rep.bins.push_back(bin);
    }
    rep.ece = j.at("ece").get<double>();
    rep.nll = j.at("nll").get<double>();
    rep.accuracy = j.at("accuracy").get<double>();
    if (!j.at("mcc").is_null()) rep.mcc = j.at("mcc").get<double>();
    rep.n = j.at("n").get<std::size_t>();
    return rep;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::validation, std::string("malformed reliability report: ") + e.what());
  }
}

void write_report(const CalibrationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write report " + path.string());
  out << report_to_json(report) << '\n';
  if (!out) fail(ErrorKind::io, "failed writing report " + path.string());
}

}  // namespace mixup

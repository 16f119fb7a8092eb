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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mixup {

struct PredictionRecord {
  /// Winning probability.
  double confidence = 0.0;
  std::size_t predicted = 0;
  std::size_t truth = 0;
  std::vector<double> probabilities;

  bool correct() const noexcept { return predicted == truth; }
};

/// Record from a probability vector; the prediction is the first argmax.
PredictionRecord make_record(std::span<const double> probabilities,
                             std::size_t truth);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  /// Absent for empty bins.
  std::optional<double> accuracy;
  std::optional<double> confidence;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  double nll = 0.0;
  double accuracy = 0.0;
  std::optional<double> mcc;
  std::size_t n = 0;
  /// Records whose true-class probability was clamped before taking logs.
  std::size_t clamped = 0;
};

inline constexpr std::size_t kDefaultBins = 15;

/// M equal-width bins ((m-1)/M, m/M]; confidence 0 lands in the first bin.
std::vector<CalibrationBin> bin_predictions(std::span<const PredictionRecord> records,
                                            std::size_t bins = kDefaultBins);
/// Index in [0, bins) of the bin holding a confidence.
std::size_t bin_index(double confidence, std::size_t bins);

/// sum_m |B_m|/n * |acc(B_m) - conf(B_m)|.
double ece(std::span<const CalibrationBin> bins, std::size_t n);

/// Mean negative log of the true-class probability, clamped below at 1e-12.
/// The number of clamped records is added to *clamped when given.
double nll(std::span<const PredictionRecord> records, std::size_t* clamped = nullptr);

double accuracy(std::span<const PredictionRecord> records);

/// Matthews correlation for binary labels; 0 when a marginal is empty.
double mcc(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

/// Full report; mcc is filled when every record is binary.
CalibrationReport calibration_report(std::span<const PredictionRecord> records,
                                     std::size_t bins = kDefaultBins);

/// Reliability report as one JSON object (schema "mixup.reliability/1").
std::string report_to_json(const CalibrationReport& report);
CalibrationReport report_from_json(const std::string& text);
void write_report(const CalibrationReport& report, const std::filesystem::path& path);

}  // namespace mixup

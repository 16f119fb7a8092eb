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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "calib/calibration.hpp"
#include "test_util.hpp"

using namespace mixup;
using mixup::testing::error_kind;

namespace {

PredictionRecord binary(double p1, std::size_t truth) {
  return make_record(std::vector<double>{1.0 - p1, p1}, truth);
}

std::vector<PredictionRecord> random_records(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(classes);
    double total = 0.0;
    for (double& v : p) total += (v = rng.uniform() + 1e-3);
    for (double& v : p) v /= total;
    out.push_back(make_record(p, rng.below(classes)));
  }
  return out;
}

// Groups by ceil(conf * M) directly and averages in a separate pass.
double brute_force_ece(const std::vector<PredictionRecord>& records, std::size_t m) {
  double ece = 0.0;
  for (std::size_t bin = 1; bin <= m; ++bin) {
    const double lo = static_cast<double>(bin - 1) / m, hi = static_cast<double>(bin) / m;
    std::vector<const PredictionRecord*> members;
    for (const auto& r : records) {
      const bool in = bin == 1 ? r.confidence <= hi : (r.confidence > lo && r.confidence <= hi);
      if (in) members.push_back(&r);
    }
    if (members.empty()) continue;
    double acc = 0.0, conf = 0.0;
    for (const auto* r : members) {
      acc += r->predicted == r->truth ? 1.0 : 0.0;
      conf += r->confidence;
    }
    acc /= members.size();
    conf /= members.size();
    ece += static_cast<double>(members.size()) / records.size() * std::abs(acc - conf);
  }
  return ece;
}

}  // namespace

TEST_CASE("records") {
  auto r = make_record(std::vector<double>{0.2, 0.5, 0.3}, 1);
  CHECK(r.predicted == 1);
  CHECK(r.confidence == 0.5);
  CHECK(r.correct());
  auto tie = make_record(std::vector<double>{0.5, 0.5}, 1);
  CHECK(tie.predicted == 0);
  CHECK(error_kind([] { make_record(std::vector<double>{1.2, -0.2}, 0); }) ==
        ErrorKind::validation);
  CHECK(error_kind([] { make_record(std::vector<double>{0.5, 0.5}, 2); }).has_value());
}

TEST_CASE("binning") {
  CHECK(bin_index(0.0, 15) == 0);
  CHECK(bin_index(1.0 / 15, 15) == 0);
  CHECK(bin_index(1.0, 15) == 14);
  CHECK(bin_index(0.5, 2) == 0);
  CHECK(error_kind([] { bin_index(1.5, 15); }) == ErrorKind::validation);
  CHECK(error_kind([] { bin_index(-0.1, 15); }) == ErrorKind::validation);

  SUBCASE("all confident") {
    std::vector<PredictionRecord> rs(7, binary(1.0, 1));
    auto bins = bin_predictions(rs);
    REQUIRE(bins.size() == kDefaultBins);
    for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
      CHECK(bins[i].count == 0);
      CHECK_FALSE(bins[i].accuracy.has_value());
    }
    CHECK(bins.back().count == 7);
    CHECK(ece(bins, 7) == 0.0);
  }
  SUBCASE("random records match a brute-force pass") {
    Rng rng(1);
    auto rs = random_records(rng, 100, 3);
    auto bins = bin_predictions(rs);
    std::size_t total = 0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      total += bins[b].count;
      if (bins[b].count == 0) continue;
      double acc = 0.0, conf = 0.0;
      std::size_t n = 0;
      for (const auto& r : rs) {
        if (bin_index(r.confidence, 15) != b) continue;
        ++n;
        acc += r.correct() ? 1.0 : 0.0;
        conf += r.confidence;
      }
      CHECK(n == bins[b].count);
      CHECK(std::abs(*bins[b].accuracy - acc / n) < 1e-12);
      CHECK(std::abs(*bins[b].confidence - conf / n) < 1e-12);
    }
    CHECK(total == 100);
  }
}

TEST_CASE("expected calibration error") {
  SUBCASE("hand case") {
    std::vector<PredictionRecord> rs = {binary(0.8, 1), binary(0.8, 0)};
    CHECK(std::abs(calibration_report(rs).ece - 0.3) < 1e-15);
  }
  SUBCASE("matches brute force and ignores order") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng.below(300);
      auto rs = random_records(rng, n, 2 + rng.below(3));
      const double e = calibration_report(rs).ece;
      CHECK(std::abs(e - brute_force_ece(rs, 15)) < 1e-12);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
      std::reverse(rs.begin(), rs.end());
      CHECK(std::abs(calibration_report(rs).ece - e) < 1e-12);
    }
  }
  SUBCASE("zero when accuracy equals confidence in every bin") {
    // Confidence 0.75 with three of four correct.
    std::vector<PredictionRecord> rs = {binary(0.75, 1), binary(0.75, 1), binary(0.75, 1),
                                        binary(0.75, 0)};
    CHECK(calibration_report(rs).ece < 1e-15);
  }
  SUBCASE("calibrated generator") {
    Rng rng(3);
    std::vector<PredictionRecord> rs;
    for (int i = 0; i < 100000; ++i) {
      const double p = 0.5 + 0.5 * rng.uniform();
      const bool correct = rng.uniform() < p;
      rs.push_back(binary(p, correct ? 1 : 0));
    }
    CHECK(calibration_report(rs).ece < 0.02);
  }
  SUBCASE("empty input") {
    CHECK(error_kind([] { ece({}, 0); }) == ErrorKind::contract);
  }
}

TEST_CASE("negative log likelihood") {
  std::vector<PredictionRecord> sure = {binary(1.0, 1), binary(0.0, 0)};
  CHECK(nll(sure) == 0.0);
  std::vector<PredictionRecord> uniform = {binary(0.5, 1), binary(0.5, 0)};
  CHECK(std::abs(nll(uniform) - std::log(2.0)) < 1e-15);
  std::size_t clamped = 0;
  std::vector<PredictionRecord> wrong = {binary(1.0, 0)};
  CHECK(nll(wrong, &clamped) == doctest::Approx(-std::log(1e-12)));
  CHECK(clamped == 1);

  Rng rng(4);
  auto rs = random_records(rng, 500, 4);
  double direct = 0.0;
  for (const auto& r : rs) direct -= std::log(r.probabilities[r.truth]);
  direct /= rs.size();
  CHECK(std::abs(nll(rs) - direct) < 1e-12);
  CHECK(nll(rs) > 0.0);
}

TEST_CASE("matthews correlation") {
  const std::vector<std::size_t> labels = {1, 1, 0, 0, 1, 0};
  CHECK(mcc(labels, labels) == doctest::Approx(1.0));
  std::vector<std::size_t> inverted(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) inverted[i] = 1 - labels[i];
  CHECK(mcc(inverted, labels) == doctest::Approx(-1.0));

  // TP=3, TN=4, FP=1, FN=2.
  std::vector<std::size_t> pred, truth;
  auto add = [&](std::size_t p, std::size_t t, int n) {
    for (int i = 0; i < n; ++i) {
      pred.push_back(p);
      truth.push_back(t);
    }
  };
  add(1, 1, 3);
  add(0, 0, 4);
  add(1, 0, 1);
  add(0, 1, 2);
  const double expect = (3.0 * 4.0 - 1.0 * 2.0) / std::sqrt(4.0 * 5.0 * 5.0 * 6.0);
  CHECK(std::abs(mcc(pred, truth) - expect) < 1e-15);
  std::vector<std::size_t> sp, st;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sp.push_back(1 - pred[i]);
    st.push_back(1 - truth[i]);
  }
  CHECK(std::abs(mcc(sp, st) - mcc(pred, truth)) < 1e-15);
  const std::vector<std::size_t> constant(6, 1);
  CHECK(mcc(constant, labels) == 0.0);
}

TEST_CASE("report") {
  Rng rng(5);
  auto rs = random_records(rng, 40, 2);
  auto report = calibration_report(rs);
  CHECK(report.n == 40);
  CHECK(report.mcc.has_value());
  CHECK(report.accuracy == accuracy(rs));
  auto back = report_from_json(report_to_json(report));
  CHECK(back.ece == report.ece);
  CHECK(back.nll == report.nll);
  CHECK(back.mcc == report.mcc);
  REQUIRE(back.bins.size() == report.bins.size());
  for (std::size_t i = 0; i < back.bins.size(); ++i) {
    CHECK(back.bins[i].count == report.bins[i].count);
    CHECK(back.bins[i].accuracy == report.bins[i].accuracy);
  }
  CHECK_FALSE(calibration_report(random_records(rng, 10, 3)).mcc.has_value());
}

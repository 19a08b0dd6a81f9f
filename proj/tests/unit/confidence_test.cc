/* Copyright 2026 The attncomp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "attncomp/confidence.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "attncomp/error.h"

namespace attncomp {
namespace {

TEST(ConfidenceTest, OneMinusInstruction) {
  SegmentScores s;
  s.instruction = 1.0;
  EXPECT_DOUBLE_EQ(confidence(s), 0.0);
  s.instruction = 0.0;
  EXPECT_DOUBLE_EQ(confidence(s), 1.0);
  s.instruction = 0.37;
  EXPECT_NEAR(confidence(s), 0.63, 1e-12);
}

std::vector<std::pair<double, double>> diagonal(int n) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < n; ++i) {
    const double c = (i + 0.5) / n;
    pairs.emplace_back(c, c);
  }
  return pairs;
}

TEST(CalibrationTest, PerfectCorrelation) {
  const auto report = calibration_report(diagonal(50));
  EXPECT_NEAR(report.pearson_r, 1.0, 1e-12);
  EXPECT_FALSE(report.degenerate);
  ASSERT_EQ(report.bins.size(), 10u);
  for (const auto& bin : report.bins) {
    ASSERT_GT(bin.count, 0u);
    EXPECT_NEAR(bin.mean_confidence, bin.mean_metric, 1e-12);
  }
}

TEST(CalibrationTest, ConstantOutcomeIsDegenerate) {
  auto pairs = diagonal(20);
  for (auto& p : pairs) p.second = 0.5;
  const auto report = calibration_report(pairs);
  EXPECT_EQ(report.pearson_r, 0.0);
  EXPECT_TRUE(report.degenerate);
}

TEST(CalibrationTest, TooFewPairs) {
  EXPECT_THROW(calibration_report(diagonal(9)), Error);
  auto bad = diagonal(12);
  bad[0].first = 1.5;
  EXPECT_THROW(calibration_report(bad), Error);
}

TEST(CalibrationTest, PearsonMatchesTwoPassOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> z(0, 0.1);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    pairs.emplace_back(x, std::clamp(0.2 + 0.6 * x + z(rng), 0.0, 1.0));
  }
  double mx = 0, my = 0;
  for (auto [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= 1000;
  my /= 1000;
  double sxy = 0, sxx = 0, syy = 0;
  for (auto [x, y] : pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  EXPECT_NEAR(calibration_report(pairs).pearson_r, sxy / std::sqrt(sxx * syy), 1e-10);
}

TEST(CalibrationTest, BinsExhaustiveAndExclusive) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 333; ++i) pairs.emplace_back(u(rng), u(rng));
  pairs.emplace_back(1.0, 1.0);
  pairs.emplace_back(0.0, 0.0);
  pairs.emplace_back(0.1, 0.0);
  for (auto mode : {BinMode::kFixedInterval, BinMode::kQuantile}) {
    const auto report = calibration_report(pairs, mode);
    std::size_t total = 0;
    for (const auto& b : report.bins) total += b.count;
    EXPECT_EQ(total, pairs.size());
    EXPECT_EQ(report.samples, pairs.size());
  }
  const auto fixed = calibration_report(pairs);
  EXPECT_DOUBLE_EQ(fixed.bins[1].low, 0.1);
  EXPECT_DOUBLE_EQ(fixed.bins[9].high, 1.0);
}

TEST(CalibrationTest, CsvFormat) {
  std::ostringstream out;
  write_calibration_csv(out, calibration_report(diagonal(10)));
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("bin_low,bin_high,count,mean_confidence,mean_metric\n", 0), 0u);
  EXPECT_NE(csv.find("# pearson_r="), std::string::npos);
}

}  // namespace
}  // namespace attncomp

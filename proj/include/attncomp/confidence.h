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

#ifndef ATTNCOMP_CONFIDENCE_H_
#define ATTNCOMP_CONFIDENCE_H_

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "attncomp/attention.h"

namespace attncomp {

// Response confidence: 1 - instruction score.
inline double confidence(const SegmentScores& scores) {
  return 1.0 - scores.instruction;
}

enum class BinMode {
  kFixedInterval,  // [0, 0.1), ..., [0.9, 1.0]
  kQuantile,       // ten equal-count groups in confidence order
};

struct CalibrationBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;  // NaN for empty bins
  double mean_metric = 0.0;      // NaN for empty bins
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double pearson_r = 0.0;
  // Set when either variable has zero variance; pearson_r is then 0.
  bool degenerate = false;
  std::size_t samples = 0;
};

// Pearson correlation of the raw pairs; 0 with degenerate=true when a
// variance vanishes.
std::pair<double, bool> pearson(std::span<const double> x,
                                std::span<const double> y);

// pairs are (confidence, outcome metric), both in [0, 1]; needs >= 10 pairs.
CalibrationReport calibration_report(
    std::span<const std::pair<double, double>> pairs,
    BinMode mode = BinMode::kFixedInterval);

// CSV "bin_low,bin_high,count,mean_confidence,mean_metric" followed by a
// "# pearson_r=..." summary line.
void write_calibration_csv(std::ostream& out, const CalibrationReport& report);

}  // namespace attncomp

#endif  // ATTNCOMP_CONFIDENCE_H_

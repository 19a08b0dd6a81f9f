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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "attncomp/error.h"

namespace attncomp {

std::pair<double, bool> pearson(std::span<const double> x,
                                std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw InvalidArgument("pearson needs aligned non-empty samples");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

CalibrationReport calibration_report(
    std::span<const std::pair<double, double>> pairs, BinMode mode) {
  if (pairs.size() < 10) {
    throw InvalidArgument("calibration needs at least 10 pairs, got " +
                          std::to_string(pairs.size()));
  }
  std::vector<double> conf, metric;
  for (const auto& [c, v] : pairs) {
    if (!(c >= 0.0 && c <= 1.0) || !(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("confidence and metric must lie in [0, 1]");
    }
    conf.push_back(c);
    metric.push_back(v);
  }
  CalibrationReport report;
  report.samples = pairs.size();
  std::tie(report.pearson_r, report.degenerate) = pearson(conf, metric);

  constexpr int kBins = 10;
  std::vector<std::vector<std::size_t>> members(kBins);
  if (mode == BinMode::kFixedInterval) {
    for (std::size_t i = 0; i < conf.size(); ++i) {
      const int b = std::min(kBins - 1, static_cast<int>(conf[i] * kBins));
      members[static_cast<std::size_t>(b)].push_back(i);
    }
  } else {
    std::vector<std::size_t> order(conf.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return conf[a] < conf[b];
    });
    for (std::size_t r = 0; r < order.size(); ++r) {
      members[r * kBins / order.size()].push_back(order[r]);
    }
  }
  for (int b = 0; b < kBins; ++b) {
    CalibrationBin bin;
    const auto& idx = members[static_cast<std::size_t>(b)];
    bin.count = idx.size();
    if (mode == BinMode::kFixedInterval) {
      bin.low = b / static_cast<double>(kBins);
      bin.high = (b + 1) / static_cast<double>(kBins);
    }
    if (idx.empty()) {
      bin.mean_confidence = bin.mean_metric =
          std::numeric_limits<double>::quiet_NaN();
    } else {
      double sc = 0.0, sm = 0.0;
      double lo = conf[idx.front()], hi = conf[idx.front()];
      for (std::size_t i : idx) {
        sc += conf[i];
        sm += metric[i];
        lo = std::min(lo, conf[i]);
        hi = std::max(hi, conf[i]);
      }
      bin.mean_confidence = sc / idx.size();
      bin.mean_metric = sm / idx.size();
      if (mode == BinMode::kQuantile) {
        bin.low = lo;
        bin.high = hi;
      }
    }
    report.bins.push_back(bin);
  }
  return report;
}

void write_calibration_csv(std::ostream& out, const CalibrationReport& report) {
  out << "bin_low,bin_high,count,mean_confidence,mean_metric\n";
  for (const auto& b : report.bins) {
    out << b.low << ',' << b.high << ',' << b.count << ',';
    if (b.count) {
      out << b.mean_confidence << ',' << b.mean_metric;
    } else {
      out << ',';
    }
    out << '\n';
  }
  out << "# pearson_r=" << report.pearson_r
      << (report.degenerate ? " degenerate=true" : "")
      << " samples=" << report.samples << '\n';
}

}  // namespace attncomp

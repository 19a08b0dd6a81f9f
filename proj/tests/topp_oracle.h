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

#ifndef ATTNCOMP_TESTS_TOPP_ORACLE_H_
#define ATTNCOMP_TESTS_TOPP_ORACLE_H_

#include <random>
#include <string>
#include <vector>

#include "attncomp/topp.h"

namespace attncomp::testing {

// Line-by-line reading of the selection pseudo-code: argsort descending with
// ties to the lower index (by repeated arg-max), seed the sum with the
// instruction score, break before adding when sum >= p or score < epsilon.
inline CompressionResult literal_top_p(double s_ins,
                                       const std::vector<ScoredSegment>& d,
                                       const TopPConfig& cfg) {
  const std::size_t k = d.size();
  std::vector<std::size_t> order;
  std::vector<bool> used(k, false);
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t best = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (used[i]) continue;
      if (best == k || d[i].score > d[best].score) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  double sum = s_ins;
  std::vector<bool> in_set(k, false);
  CompressionResult out;
  for (std::size_t i = 0; i < k; ++i) {
    if (sum >= cfg.top_p || d[order[i]].score < cfg.epsilon) break;
    in_set[order[i]] = true;
    out.selection_order.push_back(d[order[i]].id);
    sum += d[order[i]].score;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (in_set[i]) out.kept.push_back(d[i].id);
  }
  out.cumulative_score = sum;
  return out;
}

struct TopPCase {
  double instruction = 0.0;
  std::vector<ScoredSegment> segments;
  TopPConfig config;
};

// Random simplex scores, with frequent ties, zeros and near-epsilon values.
inline TopPCase random_topp_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TopPCase c;
  const int k = static_cast<int>(rng() % 12);
  std::vector<double> raw(k + 1);
  for (auto& r : raw) {
    const auto mode = rng() % 6;
    if (mode == 0) r = 0.0;
    else if (mode == 1) r = 0.25;  // tie bait
    else if (mode == 2) r = 0.005 * u(rng);
    else r = u(rng);
  }
  double total = 0.0;
  for (double r : raw) total += r;
  if (total == 0.0) {
    raw[0] = 1.0;
    total = 1.0;
  }
  c.instruction = raw[0] / total;
  for (int i = 0; i < k; ++i) {
    // Some cases share exact values after normalization to exercise ties.
    c.segments.push_back({"d" + std::to_string(i), raw[i + 1] / total, 1});
  }
  const auto pmode = rng() % 4;
  c.config.top_p = pmode == 0 ? 1.0 : (pmode == 1 ? 0.95 : 0.05 + 0.95 * u(rng));
  const auto emode = rng() % 4;
  c.config.epsilon = emode == 0 ? 0.0 : (emode == 1 ? 0.01 : 0.1 * u(rng));
  return c;
}

}  // namespace attncomp::testing

#endif  // ATTNCOMP_TESTS_TOPP_ORACLE_H_

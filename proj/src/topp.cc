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

#include "attncomp/topp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attncomp/error.h"

namespace attncomp {

void TopPConfig::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw InvalidArgument("top_p must lie in (0, 1]");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be non-negative");
  }
}

CompressionResult compress(double instruction_score,
                           std::span<const ScoredSegment> segments,
                           const TopPConfig& config) {
  config.validate();
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return segments[a].score > segments[b].score;
                   });

  CompressionResult result;
  double sum = instruction_score;
  std::vector<bool> selected(segments.size(), false);
  for (std::size_t idx : order) {
    if (sum >= config.top_p || segments[idx].score < config.epsilon) break;
    sum += segments[idx].score;
    selected[idx] = true;
    result.selection_order.push_back(segments[idx].id);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (selected[i]) result.kept.push_back(segments[i].id);
  }
  result.cumulative_score = sum;
  return result;
}

}  // namespace attncomp

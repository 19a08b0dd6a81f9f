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

#ifndef ATTNCOMP_TOPP_H_
#define ATTNCOMP_TOPP_H_

#include <span>
#include <string>
#include <vector>

#include "attncomp/attention.h"

namespace attncomp {

struct TopPConfig {
  double top_p = 0.95;
  double epsilon = 1e-2;

  static constexpr double kSentenceEpsilon = 1e-3;

  void validate() const;
};

struct CompressionResult {
  std::vector<std::string> kept;             // original input order
  std::vector<std::string> selection_order;  // score-descending
  double cumulative_score = 0.0;
};

// Sorts segments by score (descending, ties to the lower input index), seeds
// the running sum with the instruction score and admits segments until the
// sum reaches top_p or the next score falls below epsilon. Both conditions are
// tested before a segment is added.
CompressionResult compress(double instruction_score,
                           std::span<const ScoredSegment> segments,
                           const TopPConfig& config);

inline CompressionResult compress(const SegmentScores& scores,
                                  const TopPConfig& config) {
  return compress(scores.instruction, scores.selectable(), config);
}

}  // namespace attncomp

#endif  // ATTNCOMP_TOPP_H_

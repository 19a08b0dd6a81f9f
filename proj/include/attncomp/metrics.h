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

#ifndef ATTNCOMP_METRICS_H_
#define ATTNCOMP_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attncomp {

// Lowercase, drop punctuation, drop the articles a/an/the, collapse
// whitespace.
std::string normalize_answer(std::string_view text);

// 1 iff some normalized gold is a substring of the normalized prediction.
// Empty normalized golds never match.
bool normalize_and_match(std::string_view predicted,
                         std::span<const std::string> golds);

// 1 iff the normalized prediction equals some normalized gold.
bool exact_match(std::string_view predicted, std::span<const std::string> golds);

enum class MatchPolicy { kContains, kExact };
std::string_view to_string(MatchPolicy policy);
MatchPolicy match_policy_from_string(std::string_view name);
bool answer_matches(MatchPolicy policy, std::string_view predicted,
                    std::span<const std::string> golds);

// Max over golds of token-overlap F1 after normalize_answer.
double token_f1(std::string_view predicted, std::span<const std::string> golds);

struct CompressionRate {
  double rate = 0.0;
  bool infinite = false;  // all compressed token counts were zero
};

// sum(retrieved) / sum(compressed) over the run.
CompressionRate compression_rate(std::span<const std::size_t> retrieved,
                                 std::span<const std::size_t> compressed);

}  // namespace attncomp

#endif  // ATTNCOMP_METRICS_H_

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

#include "attncomp/metrics.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "attncomp/error.h"

namespace attncomp {
namespace {

std::vector<std::string> tokens_of(std::string_view normalized) {
  std::vector<std::string> out;
  std::istringstream in{std::string(normalized)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double f1_single(const std::vector<std::string>& pred,
                 const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : gold) ++counts[t];
  int common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / pred.size();
  const double recall = static_cast<double>(common) / gold.size();
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    cleaned.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  std::string out;
  for (const auto& word : tokens_of(cleaned)) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

bool normalize_and_match(std::string_view predicted,
                         std::span<const std::string> golds) {
  const auto pred = normalize_answer(predicted);
  return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) {
    const auto gold = normalize_answer(g);
    return !gold.empty() && pred.find(gold) != std::string::npos;
  });
}

bool exact_match(std::string_view predicted,
                 std::span<const std::string> golds) {
  const auto pred = normalize_answer(predicted);
  return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) {
    return normalize_answer(g) == pred;
  });
}

std::string_view to_string(MatchPolicy policy) {
  return policy == MatchPolicy::kContains ? "contains" : "exact";
}

MatchPolicy match_policy_from_string(std::string_view name) {
  if (name == "contains") return MatchPolicy::kContains;
  if (name == "exact") return MatchPolicy::kExact;
  throw InvalidArgument("unknown match policy '" + std::string(name) + "'");
}

bool answer_matches(MatchPolicy policy, std::string_view predicted,
                    std::span<const std::string> golds) {
  return policy == MatchPolicy::kContains ? normalize_and_match(predicted, golds)
                                          : exact_match(predicted, golds);
}

double token_f1(std::string_view predicted, std::span<const std::string> golds) {
  const auto pred = tokens_of(normalize_answer(predicted));
  double best = 0.0;
  for (const auto& g : golds) {
    best = std::max(best, f1_single(pred, tokens_of(normalize_answer(g))));
  }
  return best;
}

CompressionRate compression_rate(std::span<const std::size_t> retrieved,
                                 std::span<const std::size_t> compressed) {
  if (retrieved.empty() || retrieved.size() != compressed.size()) {
    throw InvalidArgument("compression rate needs aligned, non-empty counts");
  }
  std::size_t total_retrieved = 0;
  std::size_t total_compressed = 0;
  for (std::size_t i = 0; i < retrieved.size(); ++i) {
    total_retrieved += retrieved[i];
    total_compressed += compressed[i];
  }
  if (total_compressed == 0) return {0.0, true};
  return {static_cast<double>(total_retrieved) /
              static_cast<double>(total_compressed),
          false};
}

}  // namespace attncomp

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

#include "attncomp/attention.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "attncomp/error.h"

namespace attncomp {

AttentionMatrix AttentionMatrix::validated(Matrix weights, double tolerance) {
  if (weights.rows() == 0 || weights.cols() == 0) {
    throw InvalidArgument("attention matrix must be non-empty");
  }
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      const double a = weights(i, j);
      if (!std::isfinite(a) || a < 0.0) {
        throw InvalidArgument("attention entry (" + std::to_string(i) + ", " +
                              std::to_string(j) +
                              ") is negative or non-finite");
      }
      sum += a;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw InvalidArgument("attention row " + std::to_string(i) +
                            " sums to " + std::to_string(sum));
    }
  }
  return AttentionMatrix(std::move(weights));
}

AttentionMatrix AttentionMatrix::trusted(Matrix weights) {
  return AttentionMatrix(std::move(weights));
}

double SegmentScores::total() const {
  double sum = instruction;
  for (const auto& d : documents) sum += d.score;
  return sum;
}

SegmentScores segment_scores(const AttentionMatrix& attention,
                             const PromptLayout& layout) {
  const auto m = static_cast<Eigen::Index>(layout.query_tokens());
  const auto n = static_cast<Eigen::Index>(layout.context_tokens());
  if (attention.rows() != m || attention.cols() != n) {
    throw InvalidArgument(
        "attention shape " + std::to_string(attention.rows()) + "x" +
        std::to_string(attention.cols()) + " does not match layout " +
        std::to_string(m) + "x" + std::to_string(n));
  }
  // Column mass averaged over query rows; each segment score is a slice sum.
  const Eigen::VectorXd column_mass =
      attention.weights().colwise().sum().transpose() / static_cast<double>(m);

  SegmentScores scores;
  scores.granularity = layout.granularity();
  scores.documents.reserve(layout.document_ids().size());
  for (const auto& id : layout.document_ids()) {
    scores.documents.push_back({id, 0.0, 0});
  }
  const auto& spans = layout.spans();
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const double mass =
        column_mass
            .segment(static_cast<Eigen::Index>(spans[s].start),
                     static_cast<Eigen::Index>(spans[s].size()))
            .sum();
    const int doc = layout.span_document()[s];
    if (doc < 0) {
      scores.instruction = mass;
      continue;
    }
    auto& owner = scores.documents[static_cast<std::size_t>(doc)];
    owner.score += mass;
    owner.tokens += spans[s].size();
    if (layout.granularity() == Granularity::kSentence) {
      scores.sentences.push_back({layout.segment_id(s), mass, spans[s].size()});
    }
  }
  return scores;
}

AttentionMatrix mean_over_heads(const HeadStack& heads) {
  if (heads.empty()) throw InvalidArgument("empty head stack");
  Matrix sum = Matrix::Zero(heads.front().rows(), heads.front().cols());
  for (std::size_t h = 0; h < heads.size(); ++h) {
    if (heads[h].rows() != sum.rows() || heads[h].cols() != sum.cols()) {
      throw InvalidArgument("head " + std::to_string(h) +
                            " shape differs from head 0");
    }
    sum += heads[h].weights();
  }
  sum /= static_cast<double>(heads.size());
  return AttentionMatrix::trusted(std::move(sum));
}

std::vector<double> per_head_evidence_scores(
    const HeadStack& heads, std::span<const SegmentSpan> evidence,
    const PromptLayout& layout) {
  const auto n = layout.context_tokens();
  for (const auto& span : evidence) {
    if (span.start >= span.end || span.end > n) {
      throw InvalidArgument("evidence span [" + std::to_string(span.start) +
                            ", " + std::to_string(span.end) +
                            ") outside context of " + std::to_string(n) +
                            " tokens");
    }
  }
  // Overlapping evidence spans count each column once.
  std::vector<bool> in_evidence(n, false);
  for (const auto& span : evidence) {
    std::fill(in_evidence.begin() + static_cast<std::ptrdiff_t>(span.start),
              in_evidence.begin() + static_cast<std::ptrdiff_t>(span.end), true);
  }
  std::vector<double> result;
  result.reserve(heads.size());
  for (const auto& head : heads) {
    if (head.rows() != static_cast<Eigen::Index>(layout.query_tokens()) ||
        head.cols() != static_cast<Eigen::Index>(n)) {
      throw InvalidArgument("head shape does not match layout");
    }
    const Eigen::VectorXd mass = head.weights().colwise().sum().transpose();
    double score = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_evidence[j]) score += mass(static_cast<Eigen::Index>(j));
    }
    result.push_back(score / static_cast<double>(layout.query_tokens()));
  }
  return result;
}

std::vector<double> cumulative_topk_curve(std::span<const double> scores,
                                          std::size_t k_max) {
  if (scores.empty()) throw InvalidArgument("empty score list");
  if (k_max == 0) throw InvalidArgument("k_max must be positive");
  for (double s : scores) {
    if (!(s >= 0.0)) throw InvalidArgument("scores must be non-negative");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  sorted.resize(std::min(k_max, sorted.size()));
  std::partial_sum(sorted.begin(), sorted.end(), sorted.begin());
  return sorted;
}

}  // namespace attncomp

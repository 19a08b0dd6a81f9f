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

#ifndef ATTNCOMP_ATTENTION_H_
#define ATTNCOMP_ATTENTION_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attncomp/corpus.h"

namespace attncomp {

using Matrix = Eigen::MatrixXd;

// Row-stochastic query-to-context attention weights (m x n).
class AttentionMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-5;

  // Checks non-negativity, finiteness and row sums (within `tolerance`).
  static AttentionMatrix validated(Matrix weights,
                                   double tolerance = kRowSumTolerance);
  // For weights produced by a softmax in this library; no checks.
  static AttentionMatrix trusted(Matrix weights);

  const Matrix& weights() const { return weights_; }
  Eigen::Index rows() const { return weights_.rows(); }
  Eigen::Index cols() const { return weights_.cols(); }

 private:
  explicit AttentionMatrix(Matrix weights) : weights_(std::move(weights)) {}
  Matrix weights_;
};

using HeadStack = std::vector<AttentionMatrix>;

struct ScoredSegment {
  std::string id;
  double score = 0.0;
  std::size_t tokens = 0;  // context tokens covered by the segment
};

struct SegmentScores {
  double instruction = 0.0;
  std::vector<ScoredSegment> documents;
  // Per-sentence scores; populated only for sentence-granularity layouts.
  std::vector<ScoredSegment> sentences;
  Granularity granularity = Granularity::kDocument;

  // Units Top-P selects over: documents or sentences, per granularity.
  const std::vector<ScoredSegment>& selectable() const {
    return granularity == Granularity::kSentence ? sentences : documents;
  }
  double total() const;
};

// s = (1/m) sum_{i in query} sum_{j in segment} a_ij for every span.
SegmentScores segment_scores(const AttentionMatrix& attention,
                             const PromptLayout& layout);

AttentionMatrix mean_over_heads(const HeadStack& heads);

// Score each head assigns to the union of `evidence` spans.
std::vector<double> per_head_evidence_scores(
    const HeadStack& heads, std::span<const SegmentSpan> evidence,
    const PromptLayout& layout);

// c_k = sum of the k largest scores, k = 1..min(k_max, size).
std::vector<double> cumulative_topk_curve(std::span<const double> scores,
                                          std::size_t k_max);

}  // namespace attncomp

#endif  // ATTNCOMP_ATTENTION_H_

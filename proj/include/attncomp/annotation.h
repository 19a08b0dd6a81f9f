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

#ifndef ATTNCOMP_ANNOTATION_H_
#define ATTNCOMP_ANNOTATION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attncomp/attention.h"
#include "attncomp/corpus.h"
#include "attncomp/generator.h"
#include "attncomp/metrics.h"
#include "attncomp/topp.h"

namespace attncomp {

// Scores the given documents, in the given order, for one fixed query.
using SubsetScorer =
    std::function<SegmentScores(std::span<const Document> documents)>;

using AnswerMatcher =
    std::function<bool(std::string_view, std::span<const std::string>)>;

struct AnnotationConfig {
  int shuffles = 3;
  TopPConfig top_p{0.95, 1e-2};
  int max_fixpoint_iters = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FixpointResult {
  std::vector<Document> documents;
  int iterations = 0;  // scorer calls made
};

// Re-scores and re-compresses the retained documents until a pass keeps as
// many documents as it was given; that pass's input is returned. Throws
// kNotConverged when max_iters passes do not reach that state.
FixpointResult compress_to_fixpoint(const SubsetScorer& scorer,
                                    std::vector<Document> documents,
                                    const TopPConfig& config, int max_iters);

enum class AnnotationVariant { kPositive, kNegative, kDiscarded };
std::string_view to_string(AnnotationVariant variant);

struct AnnotationOutcome {
  AnnotationVariant variant = AnnotationVariant::kDiscarded;
  std::string query;
  std::vector<Document> positives;
  std::vector<Document> negatives;
  // Retained ids of every shuffle round, for inspection.
  std::vector<std::vector<std::string>> rounds;
  std::string reason;  // why a sample was discarded
};

// Labeling: `shuffles` rounds of fixpoint compression, each over a permutation
// drawn from derive_seed(config.seed, round) applied to the documents sorted
// by id (so the result does not depend on input order). Documents kept in
// every round form D+.
// Verification: the generator answers from D+; a match yields Positive. Else
// the generator answers from all of D; a miss there yields Negative, with D+
// swapped for as many documents drawn from `corpus` (ids not in D). A match
// on D only discards the sample, as does a match from an empty D+.
AnnotationOutcome annotate(const QuerySample& sample,
                           const SubsetScorer& scorer,
                           GeneratorClient& generator,
                           const AnswerMatcher& matcher,
                           const AnnotationConfig& config,
                           std::span<const Document> corpus);

// {"query":..., "positive_ids":[...], "negative_ids":[...],
//  "variant":"positive|negative"}
std::string format_annotation(const AnnotationOutcome& outcome);

struct AnnotationResult {
  std::optional<AnnotationOutcome> outcome;
  std::string error;  // set when the sample failed (e.g. generator error)
};

// Annotates samples concurrently (up to `parallelism` workers); sample i uses
// seed derive_seed(config.seed, i). Results are in sample order.
std::vector<AnnotationResult> annotate_dataset(
    std::span<const QuerySample> samples,
    const std::function<SubsetScorer(std::size_t index)>& scorer_for,
    GeneratorClient& generator, const AnswerMatcher& matcher,
    const AnnotationConfig& config, std::span<const Document> corpus,
    int parallelism);

}  // namespace attncomp

#endif  // ATTNCOMP_ANNOTATION_H_

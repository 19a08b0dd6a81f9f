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

#ifndef ATTNCOMP_SYNTHETIC_H_
#define ATTNCOMP_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "attncomp/corpus.h"
#include "attncomp/cross_attention.h"

namespace attncomp {

// Planted-relevance hidden states. With u a unit vector fixed by
// relevant_direction_seed and "noise" a vector of i.i.d. N(0, 1/d_model)
// entries (unit expected norm):
//   query rows          u + sigma * noise
//   relevant doc rows   u + sigma * noise
//   irrelevant doc rows noise, projected orthogonal to u
//   instruction rows    a fixed embedding (same for every sample), projected
//                       orthogonal to u
// Each document's rows come from a stream keyed by (seed, document id), so a
// document looks the same in any subset or order of its sample.
struct SyntheticSpec {
  int d_model = 32;
  std::uint64_t relevant_direction_seed = 1;
  double noise_scale = 0.25;
  std::vector<std::string> doc_ids;  // empty -> "d1", "d2", ...
  std::vector<std::size_t> doc_token_counts;
  std::vector<std::string> relevant_doc_ids;
  std::size_t query_tokens = 4;
  std::size_t instruction_tokens = 4;

  void validate() const;
};

struct SyntheticInstance {
  HiddenBundle bundle;
  std::vector<int> labels;
};

Eigen::VectorXd relevant_direction(int d_model, std::uint64_t direction_seed);

// Fills hidden states for an existing layout (document or sentence spans);
// all spans owned by a relevant document carry the planted direction.
HiddenBundle synthesize_hidden_states(const PromptLayout& layout,
                                      const std::vector<std::string>& relevant,
                                      int d_model,
                                      std::uint64_t direction_seed,
                                      double noise_scale, std::uint64_t seed);

SyntheticInstance generate_synthetic(const SyntheticSpec& spec,
                                     std::uint64_t seed);

// Same construction with no relevant documents (r_ins = 1).
SyntheticInstance negative_synthetic(SyntheticSpec spec, std::uint64_t seed);

// Single-head attention with identity projections,
// softmax(sharpness * X_q X_c^T); the synthetic stand-in for exported raw
// attention maps.
AttentionMatrix identity_attention(const HiddenBundle& bundle,
                                   double sharpness);

// Dataset builders keep the 3:1 positive-to-negative ratio of the reference
// training set (6,000 answerable : 2,000 all-irrelevant).
std::size_t negatives_for_positives(std::size_t positives);

struct PlantedDatasetOptions {
  int d_model = 32;
  double noise_scale = 0.25;
  std::uint64_t direction_seed = 1;
  std::size_t documents = 10;
  std::size_t min_doc_tokens = 3;
  std::size_t max_doc_tokens = 6;
  std::size_t query_tokens = 4;
  std::size_t instruction_tokens = 4;
  std::size_t min_relevant = 1;
  std::size_t max_relevant = 4;
};

// A text-level sample (documents carry the planted token counts, labels and a
// gold answer embedded in each relevant document) for the JSONL surfaces.
QuerySample planted_query_sample(const PlantedDatasetOptions& options,
                                 std::size_t relevant_count,
                                 std::uint64_t seed, std::size_t index);

// `positives` samples with min..max relevant documents followed by
// `negatives` all-irrelevant samples; sample i uses derive_seed(seed, i).
std::vector<QuerySample> planted_dataset(const PlantedDatasetOptions& options,
                                         std::size_t positives,
                                         std::size_t negatives,
                                         std::uint64_t seed);

}  // namespace attncomp

#endif  // ATTNCOMP_SYNTHETIC_H_

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

#ifndef ATTNCOMP_CROSS_ATTENTION_H_
#define ATTNCOMP_CROSS_ATTENTION_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "attncomp/attention.h"
#include "attncomp/corpus.h"

namespace attncomp {

// Per-head query/key projections of the trainable scorer. There is no value
// or output projection: the head-averaged attention weights are the output.
struct CrossAttentionHead {
  int heads = 16;
  int d_model = 0;
  int d_a = 0;
  std::vector<Matrix> w_query;  // heads x (d_model x d_a)
  std::vector<Matrix> w_key;    // heads x (d_model x d_a)

  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const CrossAttentionHead& other) const;
};

// Hidden states for the context (n x d_model) and query (m x d_model).
struct HiddenBundle {
  Matrix context;
  Matrix query;
  PromptLayout layout;

  void validate() const;
};

struct ForwardTrace {
  std::vector<Matrix> logits;         // per head, m x n, already scaled
  std::vector<Matrix> probabilities;  // per head, row-wise softmax of logits
};

struct ForwardResult {
  AttentionMatrix attention;
  std::optional<ForwardTrace> trace;
};

// A = (1/H) sum_h softmax((X_q W_Q[h]) (X_c W_K[h])^T / sqrt(d_a)).
ForwardResult forward(const HiddenBundle& bundle, const CrossAttentionHead& head,
                      bool keep_trace = false);

// Entries i.i.d. N(0, 1/d_model) from the PCG64 normal stream.
CrossAttentionHead init_random(int heads, int d_model, int d_a,
                               std::uint64_t seed);

// Weight bundles hold tensors "W_Q" and "W_K" of dims [H, d_model, d_a] in
// 32-bit storage. Saving narrows to float; loading is bit-exact with respect
// to the stored floats.
void save_head(const CrossAttentionHead& head,
               const std::filesystem::path& directory,
               int source_layer = -1, std::vector<int> head_indices = {});
CrossAttentionHead init_from_export(const std::filesystem::path& directory);

// Rounds every weight through 32-bit float (the storage precision).
CrossAttentionHead round_to_storage(CrossAttentionHead head);

}  // namespace attncomp

#endif  // ATTNCOMP_CROSS_ATTENTION_H_

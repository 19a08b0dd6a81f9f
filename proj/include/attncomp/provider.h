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

#ifndef ATTNCOMP_PROVIDER_H_
#define ATTNCOMP_PROVIDER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attncomp/attention.h"
#include "attncomp/corpus.h"
#include "attncomp/cross_attention.h"
#include "attncomp/trainer.h"

namespace attncomp {

enum class ProviderMode { kRawAttention, kHiddenStates };

struct RawAttention {
  HeadStack heads;
  PromptLayout layout;
};

// Source of attention matrices or hidden-state bundles for a dataset sample.
// `index` is the sample's position in its dataset; backends key their
// per-sample data by it.
class AttentionProvider {
 public:
  virtual ~AttentionProvider() = default;

  virtual std::string name() const = 0;
  virtual bool supports(ProviderMode mode) const = 0;
  virtual HiddenBundle hidden_states(const QuerySample& sample,
                                     std::size_t index,
                                     Granularity granularity) const = 0;
  virtual RawAttention raw_attention(const QuerySample& sample,
                                     std::size_t index,
                                     Granularity granularity) const = 0;
};

struct SyntheticProviderOptions {
  int d_model = 32;
  double noise_scale = 0.25;
  std::uint64_t direction_seed = 1;
  std::uint64_t seed = 0;
  std::size_t instruction_tokens = 4;
  double sharpness = 8.0;  // raw-attention mode only
};

// Planted-relevance backend: relevance comes from the sample's labels,
// token counts from its documents and query.
class SyntheticProvider final : public AttentionProvider {
 public:
  explicit SyntheticProvider(SyntheticProviderOptions options);

  std::string name() const override { return "synthetic"; }
  bool supports(ProviderMode) const override { return true; }
  HiddenBundle hidden_states(const QuerySample& sample, std::size_t index,
                             Granularity granularity) const override;
  RawAttention raw_attention(const QuerySample& sample, std::size_t index,
                             Granularity granularity) const override;

  const SyntheticProviderOptions& options() const { return options_; }

 private:
  SyntheticProviderOptions options_;
};

// Exported bundles: sample i lives in <root>/<i as 6 digits>/. A bundle with
// X_c and X_q serves hidden states; one with A serves raw attention.
class BundleProvider final : public AttentionProvider {
 public:
  explicit BundleProvider(std::filesystem::path root);

  std::string name() const override { return "bundle"; }
  bool supports(ProviderMode mode) const override;
  HiddenBundle hidden_states(const QuerySample& sample, std::size_t index,
                             Granularity granularity) const override;
  RawAttention raw_attention(const QuerySample& sample, std::size_t index,
                             Granularity granularity) const override;

  std::filesystem::path sample_path(std::size_t index) const;

 private:
  std::filesystem::path root_;
  bool has_hidden_ = false;
  bool has_raw_ = false;
};

// "bundle:DIR" or "synthetic:key=value,..." (keys: d_model, sigma,
// direction_seed, seed, instruction_tokens, sharpness).
std::unique_ptr<AttentionProvider> make_provider(std::string_view selector);

// Hidden states restricted to `doc_ids`, in that order (rows and spans of the
// other documents are dropped).
HiddenBundle select_documents(const HiddenBundle& bundle,
                              std::span<const std::string> doc_ids);

// Raw attention restricted to the instruction plus `doc_ids` with each row
// renormalized over the kept columns.
RawAttention select_documents(const RawAttention& raw,
                              std::span<const std::string> doc_ids);

// Provider + optional trained head -> segment scores. With a head the
// provider must serve hidden states; without one it must serve raw attention.
class SampleScorer {
 public:
  SampleScorer(std::shared_ptr<const AttentionProvider> provider,
               std::optional<CrossAttentionHead> head, Granularity granularity);

  SegmentScores score(const QuerySample& sample, std::size_t index) const;
  // Scores the sample with only `doc_ids`, in that order.
  SegmentScores score_subset(const QuerySample& sample, std::size_t index,
                             std::span<const std::string> doc_ids) const;

  Granularity granularity() const { return granularity_; }

 private:
  std::shared_ptr<const AttentionProvider> provider_;
  std::optional<CrossAttentionHead> head_;
  Granularity granularity_;
};

// Hidden states for every labeled sample, in dataset order.
std::vector<TrainingInstance> training_instances(
    std::span<const QuerySample> samples, const AttentionProvider& provider);

// Training bundles live in root/000000, root/000001, ... and carry X_c, X_q,
// a span table and a "labels" manifest entry.
std::vector<TrainingInstance> load_training_bundles(
    const std::filesystem::path& root);
void save_training_bundles(const std::filesystem::path& root,
                           std::span<const TrainingInstance> instances);

}  // namespace attncomp

#endif  // ATTNCOMP_PROVIDER_H_

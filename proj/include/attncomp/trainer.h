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

#ifndef ATTNCOMP_TRAINER_H_
#define ATTNCOMP_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "attncomp/attention.h"
#include "attncomp/cross_attention.h"

namespace attncomp {

// Scores are clamped into [kScoreClamp, 1 - kScoreClamp] before the logs.
// The loss has zero derivative with respect to a clamped score.
inline constexpr double kScoreClamp = 1e-7;

struct LossBreakdown {
  double l_doc = 0.0;
  double l_ins = 0.0;
  double total = 0.0;
};

// l_doc = -sum_i [r_i log s_i + (1 - r_i) log(1 - s_i)]
// l_ins = -[r_ins log s_ins + (1 - r_ins) log(1 - s_ins)],  r_ins = all r_i == 0
// total = l_doc + lambda * l_ins
LossBreakdown loss(const SegmentScores& scores, std::span<const int> labels,
                   double lambda);

int instruction_label(std::span<const int> labels);

struct TrainingInstance {
  TrainingInstance(HiddenBundle bundle, std::vector<int> labels);

  HiddenBundle bundle;
  std::vector<int> labels;  // aligned with bundle.layout.document_ids()

  int instruction_label() const { return attncomp::instruction_label(labels); }
};

// Reorders the documents of an instance (hidden-state rows, spans and labels
// move together). order[k] is the old index of the document placed at k.
TrainingInstance permute_documents(const TrainingInstance& instance,
                                   std::span<const std::size_t> order);

struct Gradients {
  std::vector<Matrix> d_query;
  std::vector<Matrix> d_key;
  LossBreakdown loss;
  SegmentScores scores;
};

// Analytic gradient of the total loss with respect to every W_Q / W_K entry:
// loss -> segment scores -> head-averaged A -> per-head softmax -> logits ->
// projections.
Gradients compute_gradients(const HiddenBundle& bundle,
                            const CrossAttentionHead& head,
                            std::span<const int> labels, double lambda);

struct TrainConfig {
  double learning_rate = 2e-4;
  int batch_size = 8;
  int epochs = 8;
  double lambda = 0.8;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool shuffle_docs_each_epoch = true;
  // Worker threads for per-instance forward/backward inside a batch. The
  // reduction is always in instance order.
  int threads = 1;
  // Used only when no starting head is supplied.
  int heads = 16;
  int head_dim = 0;  // 0 -> d_model / heads

  void validate() const;
};

// key=value lines; '#' starts a comment. Unknown keys are an error.
TrainConfig parse_train_config(std::istream& in);
TrainConfig load_train_config(const std::filesystem::path& path);

class AdamOptimizer {
 public:
  AdamOptimizer(const CrossAttentionHead& shape, double beta1, double beta2,
                double eps);

  void step(CrossAttentionHead& head, const std::vector<Matrix>& d_query,
            const std::vector<Matrix>& d_key, double learning_rate);
  std::int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_query_, v_query_, m_key_, v_key_;
};

struct EpochLoss {
  int epoch = 0;
  double l_doc = 0.0;
  double l_ins = 0.0;
  double total = 0.0;
};

struct TrainResult {
  CrossAttentionHead head;
  std::vector<EpochLoss> epochs;
};

// epochs x ceil(N / batch_size) Adam steps on the mean instance loss of each
// batch. Deterministic for a given config, seed, dataset and initial head.
// Random head shaped by config.heads / config.head_dim, seeded from
// config.seed.
CrossAttentionHead initial_head(const TrainConfig& config, int d_model);

TrainResult train(std::span<const TrainingInstance> dataset,
                  const TrainConfig& config, CrossAttentionHead initial);

// CSV with header "epoch,l_doc,l_ins,total".
void write_loss_csv(std::ostream& out, std::span<const EpochLoss> epochs);

}  // namespace attncomp

#endif  // ATTNCOMP_TRAINER_H_

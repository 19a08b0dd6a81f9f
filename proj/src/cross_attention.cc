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

#include "attncomp/cross_attention.h"

#include <cmath>

#include "attncomp/bundle.h"
#include "attncomp/error.h"
#include "attncomp/rng.h"

namespace attncomp {

void CrossAttentionHead::validate() const {
  if (heads <= 0 || d_model <= 0 || d_a <= 0) {
    throw InvalidArgument("head dimensions must be positive");
  }
  if (w_query.size() != static_cast<std::size_t>(heads) ||
      w_key.size() != static_cast<std::size_t>(heads)) {
    throw InvalidArgument("expected " + std::to_string(heads) +
                          " query/key projection pairs");
  }
  for (int h = 0; h < heads; ++h) {
    for (const Matrix* w : {&w_query[h], &w_key[h]}) {
      if (w->rows() != d_model || w->cols() != d_a) {
        throw InvalidArgument("projection of head " + std::to_string(h) +
                              " is not " + std::to_string(d_model) + "x" +
                              std::to_string(d_a));
      }
      if (!w->allFinite()) {
        throw InvalidArgument("projection of head " + std::to_string(h) +
                              " has non-finite entries");
      }
    }
  }
}

std::size_t CrossAttentionHead::parameter_count() const {
  return 2u * static_cast<std::size_t>(heads) *
         static_cast<std::size_t>(d_model) * static_cast<std::size_t>(d_a);
}

bool CrossAttentionHead::operator==(const CrossAttentionHead& other) const {
  if (heads != other.heads || d_model != other.d_model || d_a != other.d_a ||
      w_query.size() != other.w_query.size() ||
      w_key.size() != other.w_key.size()) {
    return false;
  }
  for (std::size_t h = 0; h < w_query.size(); ++h) {
    if (w_query[h] != other.w_query[h] || w_key[h] != other.w_key[h]) {
      return false;
    }
  }
  return true;
}

void HiddenBundle::validate() const {
  if (context.rows() != static_cast<Eigen::Index>(layout.context_tokens()) ||
      query.rows() != static_cast<Eigen::Index>(layout.query_tokens())) {
    throw InvalidArgument("hidden states (" + std::to_string(context.rows()) +
                          " context, " + std::to_string(query.rows()) +
                          " query rows) do not match layout (" +
                          std::to_string(layout.context_tokens()) + ", " +
                          std::to_string(layout.query_tokens()) + ")");
  }
  if (context.cols() != query.cols()) {
    throw InvalidArgument("context and query hidden widths differ");
  }
}

ForwardResult forward(const HiddenBundle& bundle, const CrossAttentionHead& head,
                      bool keep_trace) {
  bundle.validate();
  if (bundle.context.cols() != head.d_model) {
    throw InvalidArgument("hidden width " + std::to_string(bundle.context.cols()) +
                          " does not match head d_model " +
                          std::to_string(head.d_model));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(head.d_a));
  Matrix average = Matrix::Zero(bundle.query.rows(), bundle.context.rows());
  ForwardTrace trace;
  for (int h = 0; h < head.heads; ++h) {
    const Matrix q = bundle.query * head.w_query[h];
    const Matrix k = bundle.context * head.w_key[h];
    Matrix logits = (q * k.transpose()) * scale;
    if (!logits.allFinite()) throw Numerical("numerical overflow in logits");
    Matrix probs = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
    probs.array().colwise() /= probs.rowwise().sum().array();
    if (!probs.allFinite()) throw Numerical("numerical overflow in softmax");
    average += probs;
    if (keep_trace) {
      trace.logits.push_back(std::move(logits));
      trace.probabilities.push_back(std::move(probs));
    }
  }
  average /= static_cast<double>(head.heads);
  ForwardResult result{AttentionMatrix::trusted(std::move(average)), std::nullopt};
  if (keep_trace) result.trace = std::move(trace);
  return result;
}

CrossAttentionHead init_random(int heads, int d_model, int d_a,
                               std::uint64_t seed) {
  if (heads <= 0 || d_model <= 0 || d_a <= 0) {
    throw InvalidArgument("head dimensions must be positive");
  }
  Pcg64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
  auto draw = [&] {
    Matrix w(d_model, d_a);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * rng.normal();
    }
    return w;
  };
  CrossAttentionHead head;
  head.heads = heads;
  head.d_model = d_model;
  head.d_a = d_a;
  for (int h = 0; h < heads; ++h) {
    head.w_query.push_back(draw());
    head.w_key.push_back(draw());
  }
  return head;
}

void save_head(const CrossAttentionHead& head,
               const std::filesystem::path& directory, int source_layer,
               std::vector<int> head_indices) {
  head.validate();
  Manifest manifest;
  manifest.d_model = head.d_model;
  manifest.heads = head.heads;
  manifest.d_a = head.d_a;
  manifest.source_layer = source_layer;
  manifest.head_indices = std::move(head_indices);
  std::map<std::string, Tensor> tensors;
  tensors["W_Q"] = tensor_from_matrices(head.w_query);
  tensors["W_K"] = tensor_from_matrices(head.w_key);
  save_bundle(directory, std::move(manifest), tensors);
}

CrossAttentionHead init_from_export(const std::filesystem::path& directory) {
  const Bundle bundle = load_bundle(directory);
  if (!bundle.has("W_Q") || !bundle.has("W_K")) {
    throw DataLoss("bundle at " + directory.string() +
                   " holds no W_Q/W_K weights");
  }
  CrossAttentionHead head;
  head.heads = static_cast<int>(bundle.manifest.heads);
  head.d_model = static_cast<int>(bundle.manifest.d_model);
  head.d_a = static_cast<int>(bundle.manifest.d_a);
  for (int h = 0; h < head.heads; ++h) {
    head.w_query.push_back(matrix_from_tensor(bundle.tensor("W_Q"), h));
    head.w_key.push_back(matrix_from_tensor(bundle.tensor("W_K"), h));
  }
  head.validate();
  return head;
}

CrossAttentionHead round_to_storage(CrossAttentionHead head) {
  auto round = [](Matrix& w) {
    w = w.cast<float>().cast<double>();
  };
  for (auto& w : head.w_query) round(w);
  for (auto& w : head.w_key) round(w);
  return head;
}

}  // namespace attncomp

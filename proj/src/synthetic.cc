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

#include "attncomp/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attncomp/bundle.h"
#include "attncomp/error.h"
#include "attncomp/rng.h"

namespace attncomp {
namespace {

constexpr std::uint64_t kInstructionStream = 0x696e73;  // "ins"
constexpr std::uint64_t kQueryStream = 0x717279;        // "qry"

std::uint64_t id_key(const std::string& id) {
  return fnv1a64(std::as_bytes(std::span(id.data(), id.size())));
}

Eigen::VectorXd noise_vector(Pcg64& rng, int d_model) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
  Eigen::VectorXd v(d_model);
  for (int i = 0; i < d_model; ++i) v(i) = scale * rng.normal();
  return v;
}

Eigen::VectorXd orthogonal_to(const Eigen::VectorXd& v,
                              const Eigen::VectorXd& u) {
  return v - v.dot(u) * u;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (d_model <= 0) throw InvalidArgument("d_model must be positive");
  if (!(noise_scale >= 0.0)) throw InvalidArgument("noise_scale must be >= 0");
  if (!doc_ids.empty() && doc_ids.size() != doc_token_counts.size()) {
    throw InvalidArgument("doc_ids and doc_token_counts differ in length");
  }
  if (query_tokens == 0 || instruction_tokens == 0) {
    throw InvalidArgument("query and instruction need >= 1 token");
  }
}

Eigen::VectorXd relevant_direction(int d_model, std::uint64_t direction_seed) {
  Pcg64 rng(direction_seed);
  Eigen::VectorXd u = noise_vector(rng, d_model);
  return u / u.norm();
}

HiddenBundle synthesize_hidden_states(const PromptLayout& layout,
                                      const std::vector<std::string>& relevant,
                                      int d_model,
                                      std::uint64_t direction_seed,
                                      double noise_scale, std::uint64_t seed) {
  const Eigen::VectorXd u = relevant_direction(d_model, direction_seed);
  Matrix context(static_cast<Eigen::Index>(layout.context_tokens()), d_model);

  // Instruction rows are a property of the prompt template, not the sample.
  Pcg64 ins_rng(derive_seed(direction_seed, kInstructionStream));
  const auto& ins = layout.instruction();
  for (std::size_t t = ins.start; t < ins.end; ++t) {
    context.row(static_cast<Eigen::Index>(t)) =
        orthogonal_to(noise_vector(ins_rng, d_model), u).transpose();
  }

  for (const auto& id : layout.document_ids()) {
    const bool is_relevant =
        std::find(relevant.begin(), relevant.end(), id) != relevant.end();
    Pcg64 rng(derive_seed(seed, id_key(id)));
    for (const auto& span : layout.spans()) {
      if (span.kind == SegmentKind::kInstruction || span.owner_id != id) {
        continue;
      }
      for (std::size_t t = span.start; t < span.end; ++t) {
        const Eigen::VectorXd noise = noise_vector(rng, d_model);
        const Eigen::VectorXd row = is_relevant
                                        ? Eigen::VectorXd(u + noise_scale * noise)
                                        : orthogonal_to(noise, u);
        context.row(static_cast<Eigen::Index>(t)) = row.transpose();
      }
    }
  }

  Pcg64 q_rng(derive_seed(seed, kQueryStream));
  Matrix query(static_cast<Eigen::Index>(layout.query_tokens()), d_model);
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    query.row(i) = (u + noise_scale * noise_vector(q_rng, d_model)).transpose();
  }
  return HiddenBundle{std::move(context), std::move(query), layout};
}

SyntheticInstance generate_synthetic(const SyntheticSpec& spec,
                                     std::uint64_t seed) {
  spec.validate();
  std::vector<Document> docs;
  for (std::size_t i = 0; i < spec.doc_token_counts.size(); ++i) {
    Document d;
    d.id = spec.doc_ids.empty() ? "d" + std::to_string(i + 1) : spec.doc_ids[i];
    d.text = d.id;
    d.token_count = spec.doc_token_counts[i];
    docs.push_back(std::move(d));
  }
  for (const auto& id : spec.relevant_doc_ids) {
    if (std::none_of(docs.begin(), docs.end(),
                     [&](const Document& d) { return d.id == id; })) {
      throw InvalidArgument("relevant id '" + id + "' is not a document");
    }
  }
  const auto layout = assemble_layout(spec.instruction_tokens, docs,
                                      spec.query_tokens, Granularity::kDocument);
  SyntheticInstance out{
      synthesize_hidden_states(layout, spec.relevant_doc_ids, spec.d_model,
                               spec.relevant_direction_seed, spec.noise_scale,
                               seed),
      {}};
  for (const auto& d : docs) {
    out.labels.push_back(std::find(spec.relevant_doc_ids.begin(),
                                   spec.relevant_doc_ids.end(),
                                   d.id) != spec.relevant_doc_ids.end());
  }
  return out;
}

SyntheticInstance negative_synthetic(SyntheticSpec spec, std::uint64_t seed) {
  spec.relevant_doc_ids.clear();
  return generate_synthetic(spec, seed);
}

AttentionMatrix identity_attention(const HiddenBundle& bundle,
                                   double sharpness) {
  bundle.validate();
  Matrix logits = sharpness * (bundle.query * bundle.context.transpose());
  Matrix probs =
      (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
  probs.array().colwise() /= probs.rowwise().sum().array();
  return AttentionMatrix::trusted(std::move(probs));
}

std::size_t negatives_for_positives(std::size_t positives) {
  return (positives + 2) / 3;
}

QuerySample planted_query_sample(const PlantedDatasetOptions& options,
                                 std::size_t relevant_count,
                                 std::uint64_t seed, std::size_t index) {
  if (options.documents == 0 || relevant_count > options.documents) {
    throw InvalidArgument("relevant count exceeds document count");
  }
  if (options.min_doc_tokens == 0 ||
      options.max_doc_tokens < options.min_doc_tokens) {
    throw InvalidArgument("invalid document token range");
  }
  Pcg64 rng(seed);
  const std::string answer = "answer-" + std::to_string(index);
  std::vector<std::size_t> order(options.documents);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  std::vector<int> labels(options.documents, 0);
  for (std::size_t k = 0; k < relevant_count; ++k) labels[order[k]] = 1;

  QuerySample sample;
  sample.query = "query-" + std::to_string(index);
  for (std::size_t w = 1; w < options.query_tokens; ++w) sample.query += " q";
  sample.gold_answers = {answer};
  for (std::size_t i = 0; i < options.documents; ++i) {
    const std::size_t tokens =
        options.min_doc_tokens +
        rng.below(options.max_doc_tokens - options.min_doc_tokens + 1);
    Document doc;
    doc.id = "s" + std::to_string(index) + "d" + std::to_string(i + 1);
    doc.title = doc.id;
    doc.text = labels[i] ? answer : "filler";
    for (std::size_t w = 1; w < tokens; ++w) doc.text += " w";
    doc.token_count = tokens;
    sample.documents.push_back(std::move(doc));
  }
  sample.relevance_labels = std::move(labels);
  return sample;
}

std::vector<QuerySample> planted_dataset(const PlantedDatasetOptions& options,
                                         std::size_t positives,
                                         std::size_t negatives,
                                         std::uint64_t seed) {
  if (options.min_relevant == 0 || options.max_relevant < options.min_relevant) {
    throw InvalidArgument("invalid relevant-document range");
  }
  std::vector<QuerySample> out;
  out.reserve(positives + negatives);
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    std::size_t relevant = 0;
    if (i < positives) {
      Pcg64 rng(derive_seed(s, 0x72656c));
      relevant = options.min_relevant +
                 rng.below(options.max_relevant - options.min_relevant + 1);
    }
    out.push_back(planted_query_sample(options, relevant, s, i));
  }
  return out;
}

}  // namespace attncomp

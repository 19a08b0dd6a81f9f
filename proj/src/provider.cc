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

#include "attncomp/provider.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "attncomp/bundle.h"
#include "attncomp/error.h"
#include "attncomp/rng.h"
#include "attncomp/synthetic.h"

namespace attncomp {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> relevant_ids(const QuerySample& sample) {
  std::vector<std::string> ids;
  if (!sample.relevance_labels) return ids;
  for (std::size_t i = 0; i < sample.documents.size(); ++i) {
    if ((*sample.relevance_labels)[i] == 1) ids.push_back(sample.documents[i].id);
  }
  return ids;
}

void check_documents(const PromptLayout& layout, const QuerySample& sample,
                     const fs::path& where) {
  std::vector<std::string> ids;
  for (const auto& d : sample.documents) ids.push_back(d.id);
  if (layout.document_ids() != ids) {
    throw InvalidArgument("bundle " + where.string() +
                          " documents do not match the dataset sample");
  }
}

// Spans of the layout grouped by document index.
std::vector<std::vector<std::size_t>> spans_by_document(
    const PromptLayout& layout) {
  std::vector<std::vector<std::size_t>> groups(layout.document_ids().size());
  for (std::size_t s = 1; s < layout.spans().size(); ++s) {
    groups[static_cast<std::size_t>(layout.span_document()[s])].push_back(s);
  }
  return groups;
}

std::size_t find_document(const PromptLayout& layout, const std::string& id) {
  const auto& ids = layout.document_ids();
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw InvalidArgument("unknown document '" + id + "'");
  return static_cast<std::size_t>(it - ids.begin());
}

// New layout over instruction + chosen documents, plus the source column of
// every new column.
std::pair<PromptLayout, std::vector<Eigen::Index>> restrict_layout(
    const PromptLayout& layout, std::span<const std::string> doc_ids) {
  const auto groups = spans_by_document(layout);
  std::vector<SegmentSpan> spans{layout.instruction()};
  std::vector<Eigen::Index> source;
  for (std::size_t t = layout.instruction().start; t < layout.instruction().end;
       ++t) {
    source.push_back(static_cast<Eigen::Index>(t));
  }
  std::size_t cursor = layout.instruction().end;
  for (const auto& id : doc_ids) {
    for (std::size_t s : groups[find_document(layout, id)]) {
      SegmentSpan span = layout.spans()[s];
      for (std::size_t t = span.start; t < span.end; ++t) {
        source.push_back(static_cast<Eigen::Index>(t));
      }
      const std::size_t len = span.size();
      span.start = cursor;
      span.end = cursor + len;
      cursor = span.end;
      spans.push_back(std::move(span));
    }
  }
  return {PromptLayout::from_spans(std::move(spans), layout.query_tokens(),
                                   layout.granularity()),
          std::move(source)};
}

std::uint64_t parse_u64(const std::string& v) { return std::stoull(v); }

}  // namespace

SyntheticProvider::SyntheticProvider(SyntheticProviderOptions options)
    : options_(options) {
  if (options_.d_model <= 0 || options_.instruction_tokens == 0 ||
      !(options_.noise_scale >= 0.0)) {
    throw InvalidArgument("invalid synthetic provider options");
  }
}

HiddenBundle SyntheticProvider::hidden_states(const QuerySample& sample,
                                              std::size_t index,
                                              Granularity granularity) const {
  sample.validate();
  const auto layout =
      assemble_layout(options_.instruction_tokens, sample.documents,
                      fallback_token_count(sample.query), granularity);
  return synthesize_hidden_states(layout, relevant_ids(sample), options_.d_model,
                                  options_.direction_seed,
                                  options_.noise_scale,
                                  derive_seed(options_.seed, index));
}

RawAttention SyntheticProvider::raw_attention(const QuerySample& sample,
                                              std::size_t index,
                                              Granularity granularity) const {
  auto hidden = hidden_states(sample, index, granularity);
  return RawAttention{{identity_attention(hidden, options_.sharpness)},
                      hidden.layout};
}

BundleProvider::BundleProvider(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) {
    throw Error(ErrorCode::kIo, "bundle root " + root_.string() +
                                    " is not a directory");
  }
  const auto first = sample_path(0);
  if (fs::exists(first / "manifest.json")) {
    const auto bundle = load_bundle(first);
    has_hidden_ = bundle.has("X_c") && bundle.has("X_q");
    has_raw_ = bundle.has("A");
  }
}

fs::path BundleProvider::sample_path(std::size_t index) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu", index);
  return root_ / name;
}

bool BundleProvider::supports(ProviderMode mode) const {
  return mode == ProviderMode::kHiddenStates ? has_hidden_ : has_raw_;
}

HiddenBundle BundleProvider::hidden_states(const QuerySample& sample,
                                           std::size_t index,
                                           Granularity granularity) const {
  const auto path = sample_path(index);
  const auto bundle = load_bundle(path);
  if (!bundle.has("X_c") || !bundle.has("X_q")) {
    throw InvalidArgument("bundle " + path.string() + " has no hidden states");
  }
  auto layout = bundle.layout();
  if (!layout) throw DataLoss("bundle " + path.string() + " has no span table");
  if (layout->granularity() != granularity) {
    throw InvalidArgument("bundle " + path.string() + " is " +
                          std::string(to_string(layout->granularity())) +
                          "-level, requested " +
                          std::string(to_string(granularity)));
  }
  check_documents(*layout, sample, path);
  HiddenBundle out{matrix_from_tensor(bundle.tensor("X_c")),
                   matrix_from_tensor(bundle.tensor("X_q")), *layout};
  out.validate();
  return out;
}

RawAttention BundleProvider::raw_attention(const QuerySample& sample,
                                           std::size_t index,
                                           Granularity granularity) const {
  const auto path = sample_path(index);
  const auto bundle = load_bundle(path);
  if (!bundle.has("A")) {
    throw InvalidArgument("bundle " + path.string() + " has no attention");
  }
  auto layout = bundle.layout();
  if (!layout) throw DataLoss("bundle " + path.string() + " has no span table");
  if (layout->granularity() != granularity) {
    throw InvalidArgument("bundle " + path.string() +
                          " granularity differs from the request");
  }
  check_documents(*layout, sample, path);
  const auto& a = bundle.tensor("A");
  RawAttention raw{{}, *layout};
  const std::int64_t count = a.dims.size() == 2 ? 1 : a.dims[0];
  for (std::int64_t h = 0; h < count; ++h) {
    raw.heads.push_back(AttentionMatrix::validated(matrix_from_tensor(a, h)));
  }
  return raw;
}

std::unique_ptr<AttentionProvider> make_provider(std::string_view selector) {
  const auto colon = selector.find(':');
  const std::string kind(selector.substr(0, colon));
  const std::string rest(colon == std::string_view::npos
                             ? std::string_view{}
                             : selector.substr(colon + 1));
  if (kind == "bundle") {
    if (rest.empty()) throw InvalidArgument("bundle provider needs a directory");
    return std::make_unique<BundleProvider>(rest);
  }
  if (kind != "synthetic") {
    throw InvalidArgument("unknown provider '" + kind + "'");
  }
  SyntheticProviderOptions options;
  std::stringstream items(rest);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("synthetic option '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "d_model") options.d_model = std::stoi(value);
      else if (key == "sigma") options.noise_scale = std::stod(value);
      else if (key == "direction_seed") options.direction_seed = parse_u64(value);
      else if (key == "seed") options.seed = parse_u64(value);
      else if (key == "instruction_tokens")
        options.instruction_tokens = parse_u64(value);
      else if (key == "sharpness") options.sharpness = std::stod(value);
      else throw InvalidArgument("unknown synthetic option '" + key + "'");
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad value for synthetic option '" + key + "'");
    }
  }
  return std::make_unique<SyntheticProvider>(options);
}

HiddenBundle select_documents(const HiddenBundle& bundle,
                              std::span<const std::string> doc_ids) {
  auto [layout, source] = restrict_layout(bundle.layout, doc_ids);
  Matrix context(static_cast<Eigen::Index>(source.size()), bundle.context.cols());
  for (std::size_t r = 0; r < source.size(); ++r) {
    context.row(static_cast<Eigen::Index>(r)) = bundle.context.row(source[r]);
  }
  return HiddenBundle{std::move(context), bundle.query, std::move(layout)};
}

RawAttention select_documents(const RawAttention& raw,
                              std::span<const std::string> doc_ids) {
  auto [layout, source] = restrict_layout(raw.layout, doc_ids);
  RawAttention out{{}, std::move(layout)};
  for (const auto& head : raw.heads) {
    Matrix w(head.rows(), static_cast<Eigen::Index>(source.size()));
    for (std::size_t c = 0; c < source.size(); ++c) {
      w.col(static_cast<Eigen::Index>(c)) = head.weights().col(source[c]);
    }
    const Eigen::VectorXd sums = w.rowwise().sum();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (sums(i) <= 0.0) {
        throw Numerical("no attention mass left after restricting documents");
      }
      w.row(i) /= sums(i);
    }
    out.heads.push_back(AttentionMatrix::trusted(std::move(w)));
  }
  return out;
}

SampleScorer::SampleScorer(std::shared_ptr<const AttentionProvider> provider,
                           std::optional<CrossAttentionHead> head,
                           Granularity granularity)
    : provider_(std::move(provider)),
      head_(std::move(head)),
      granularity_(granularity) {
  if (!provider_) throw InvalidArgument("scorer needs a provider");
  const auto mode =
      head_ ? ProviderMode::kHiddenStates : ProviderMode::kRawAttention;
  if (!provider_->supports(mode)) {
    throw InvalidArgument(
        provider_->name() +
        (head_ ? " provider does not serve hidden states"
               : " provider does not serve raw attention (pass weights)"));
  }
  if (head_) head_->validate();
}

SegmentScores SampleScorer::score(const QuerySample& sample,
                                  std::size_t index) const {
  if (head_) {
    const auto hidden = provider_->hidden_states(sample, index, granularity_);
    return segment_scores(forward(hidden, *head_).attention, hidden.layout);
  }
  const auto raw = provider_->raw_attention(sample, index, granularity_);
  return segment_scores(mean_over_heads(raw.heads), raw.layout);
}

SegmentScores SampleScorer::score_subset(
    const QuerySample& sample, std::size_t index,
    std::span<const std::string> doc_ids) const {
  if (head_) {
    const auto hidden = select_documents(
        provider_->hidden_states(sample, index, granularity_), doc_ids);
    return segment_scores(forward(hidden, *head_).attention, hidden.layout);
  }
  const auto raw = select_documents(
      provider_->raw_attention(sample, index, granularity_), doc_ids);
  return segment_scores(mean_over_heads(raw.heads), raw.layout);
}

std::vector<TrainingInstance> training_instances(
    std::span<const QuerySample> samples, const AttentionProvider& provider) {
  std::vector<TrainingInstance> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].relevance_labels) {
      throw InvalidArgument("sample " + std::to_string(i) + " has no labels");
    }
    auto hidden = provider.hidden_states(samples[i], i, Granularity::kDocument);
    out.emplace_back(std::move(hidden), *samples[i].relevance_labels);
  }
  return out;
}

std::vector<TrainingInstance> load_training_bundles(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIo, "training root " + root.string() +
                                    " is not a directory");
  }
  const BundleProvider provider(root);
  std::vector<TrainingInstance> out;
  for (std::size_t i = 0;; ++i) {
    const auto path = provider.sample_path(i);
    if (!fs::exists(path / "manifest.json")) break;
    const auto bundle = load_bundle(path);
    if (!bundle.has("X_c") || !bundle.has("X_q")) {
      throw InvalidArgument("bundle " + path.string() + " has no hidden states");
    }
    if (!bundle.manifest.labels) {
      throw InvalidArgument("bundle " + path.string() + " has no labels");
    }
    auto layout = bundle.layout();
    if (!layout) throw DataLoss("bundle " + path.string() + " has no span table");
    out.emplace_back(HiddenBundle{matrix_from_tensor(bundle.tensor("X_c")),
                                  matrix_from_tensor(bundle.tensor("X_q")),
                                  *layout},
                     *bundle.manifest.labels);
  }
  if (out.empty()) throw InvalidArgument("no training bundles in " + root.string());
  return out;
}

void save_training_bundles(const fs::path& root,
                           std::span<const TrainingInstance> instances) {
  fs::create_directories(root);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    Manifest manifest;
    manifest.m = inst.bundle.query.rows();
    manifest.n = inst.bundle.context.rows();
    manifest.d_model = inst.bundle.context.cols();
    manifest.spans = inst.bundle.layout.spans();
    manifest.labels = inst.labels;
    std::map<std::string, Tensor> tensors;
    tensors["X_c"] = tensor_from_matrix(inst.bundle.context);
    tensors["X_q"] = tensor_from_matrix(inst.bundle.query);
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu", i);
    save_bundle(root / name, std::move(manifest), tensors);
  }
}

}  // namespace attncomp

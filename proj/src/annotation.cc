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

#include "attncomp/annotation.h"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "attncomp/error.h"
#include "attncomp/rng.h"
#include "json.hpp"

namespace attncomp {
namespace {

constexpr std::uint64_t kReplacementStream = 0x7265706c;  // "repl"

std::vector<std::string> ids_of(std::span<const Document> docs) {
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id);
  return ids;
}

}  // namespace

void AnnotationConfig::validate() const {
  if (shuffles < 1) throw InvalidArgument("shuffle count must be >= 1");
  if (max_fixpoint_iters < 1) throw InvalidArgument("fixpoint cap must be >= 1");
  top_p.validate();
}

FixpointResult compress_to_fixpoint(const SubsetScorer& scorer,
                                    std::vector<Document> documents,
                                    const TopPConfig& config, int max_iters) {
  for (int iter = 1; iter <= max_iters; ++iter) {
    const SegmentScores scores = scorer(documents);
    const CompressionResult kept = compress(scores, config);
    if (kept.kept.size() == documents.size()) {
      return {std::move(documents), iter};
    }
    std::vector<Document> next;
    for (const auto& id : kept.kept) {
      auto it = std::find_if(documents.begin(), documents.end(),
                             [&](const Document& d) { return d.id == id; });
      if (it == documents.end()) {
        throw InvalidArgument("compressor kept unknown document '" + id + "'");
      }
      next.push_back(*it);
    }
    documents = std::move(next);
  }
  throw Error(ErrorCode::kNotConverged,
              "fixpoint compression did not converge within " +
                  std::to_string(max_iters) + " iterations");
}

std::string_view to_string(AnnotationVariant variant) {
  switch (variant) {
    case AnnotationVariant::kPositive:
      return "positive";
    case AnnotationVariant::kNegative:
      return "negative";
    case AnnotationVariant::kDiscarded:
      return "discarded";
  }
  return "unknown";
}

AnnotationOutcome annotate(const QuerySample& sample,
                           const SubsetScorer& scorer,
                           GeneratorClient& generator,
                           const AnswerMatcher& matcher,
                           const AnnotationConfig& config,
                           std::span<const Document> corpus) {
  config.validate();
  if (sample.gold_answers.empty()) {
    throw InvalidArgument("annotation needs gold answers");
  }
  std::vector<Document> canonical = sample.documents;
  std::sort(canonical.begin(), canonical.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });

  AnnotationOutcome out;
  out.query = sample.query;
  std::multiset<std::string> votes;
  for (int round = 0; round < config.shuffles; ++round) {
    std::vector<Document> permuted = canonical;
    Pcg64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(round)));
    rng.shuffle(std::span(permuted));
    const auto fix = compress_to_fixpoint(scorer, std::move(permuted),
                                          config.top_p,
                                          config.max_fixpoint_iters);
    out.rounds.push_back(ids_of(fix.documents));
    for (const auto& d : fix.documents) votes.insert(d.id);
  }
  for (const auto& d : sample.documents) {
    if (votes.count(d.id) == static_cast<std::size_t>(config.shuffles)) {
      out.positives.push_back(d);
    } else {
      out.negatives.push_back(d);
    }
  }

  if (matcher(generator.generate(sample.query, out.positives),
              sample.gold_answers)) {
    if (out.positives.empty()) {
      out.variant = AnnotationVariant::kDiscarded;
      out.reason = "answered correctly without any retained document";
    } else {
      out.variant = AnnotationVariant::kPositive;
    }
    return out;
  }
  if (matcher(generator.generate(sample.query, sample.documents),
              sample.gold_answers)) {
    out.variant = AnnotationVariant::kDiscarded;
    out.reason = "answer found only with the full document set";
    return out;
  }

  std::set<std::string> taken;
  for (const auto& d : sample.documents) taken.insert(d.id);
  std::vector<const Document*> pool;
  for (const auto& d : corpus) {
    if (!taken.count(d.id)) pool.push_back(&d);
  }
  if (pool.size() < out.positives.size()) {
    throw InvalidArgument("corpus has " + std::to_string(pool.size()) +
                          " candidate documents, need " +
                          std::to_string(out.positives.size()));
  }
  Pcg64 rng(derive_seed(config.seed, kReplacementStream));
  rng.shuffle(std::span(pool));
  for (std::size_t k = 0; k < out.positives.size(); ++k) {
    out.negatives.push_back(*pool[k]);
  }
  out.positives.clear();
  out.variant = AnnotationVariant::kNegative;
  return out;
}

std::string format_annotation(const AnnotationOutcome& outcome) {
  nlohmann::json j;
  j["query"] = outcome.query;
  j["positive_ids"] = ids_of(outcome.positives);
  j["negative_ids"] = ids_of(outcome.negatives);
  j["variant"] = std::string(to_string(outcome.variant));
  return j.dump();
}

std::vector<AnnotationResult> annotate_dataset(
    std::span<const QuerySample> samples,
    const std::function<SubsetScorer(std::size_t index)>& scorer_for,
    GeneratorClient& generator, const AnswerMatcher& matcher,
    const AnnotationConfig& config, std::span<const Document> corpus,
    int parallelism) {
  config.validate();
  std::vector<AnnotationResult> results(samples.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      AnnotationConfig local = config;
      local.seed = derive_seed(config.seed, i);
      try {
        results[i].outcome = annotate(samples[i], scorer_for(i), generator,
                                      matcher, local, corpus);
      } catch (const Error& e) {
        results[i].error = e.what();
      }
    }
  };
  const int workers = std::max(
      1, std::min(parallelism, static_cast<int>(samples.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace attncomp

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

#ifndef ATTNCOMP_EVAL_H_
#define ATTNCOMP_EVAL_H_

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attncomp/cross_attention.h"
#include "attncomp/generator.h"
#include "attncomp/metrics.h"
#include "attncomp/provider.h"
#include "attncomp/topp.h"

namespace attncomp {

struct EvalRecord {
  std::size_t index = 0;
  std::string query;
  std::size_t tokens_retrieved = 0;
  // Kept-unit tokens; floored at 1 when every unit was filtered, so the
  // per-record rate stays finite.
  std::size_t tokens_compressed = 0;
  std::vector<std::string> kept;  // retrieval order
  double instruction_score = 0.0;
  double confidence = 0.0;
  double cumulative_score = 0.0;
  std::optional<bool> answerable;  // from dataset labels, when present
  std::optional<std::string> predicted;
  std::optional<double> f1;
  std::optional<bool> correct;
  double compression_seconds = 0.0;
  double generation_seconds = 0.0;
  std::string error;

  bool failed() const { return !error.empty(); }
};

struct RunConfig {
  std::shared_ptr<const AttentionProvider> provider;
  std::optional<CrossAttentionHead> head;
  Granularity granularity = Granularity::kDocument;
  TopPConfig top_p;
  int parallelism = 1;
  std::shared_ptr<GeneratorClient> generator;  // optional
  MatchPolicy match_policy = MatchPolicy::kContains;
};

struct EvalSummary {
  std::size_t samples = 0;
  std::size_t failures = 0;
  CompressionRate rate;
  std::optional<double> mean_f1;
  std::optional<double> accuracy;
  double mean_confidence = 0.0;
  double mean_kept = 0.0;
  double mean_compression_seconds = 0.0;
  double mean_generation_seconds = 0.0;
};

// Provider -> scores -> Top-P -> optional generation and answer metrics.
// Compression time covers scoring and selection; retrieval is not timed.
EvalRecord evaluate_sample(const QuerySample& sample, std::size_t index,
                           const SampleScorer& scorer, const RunConfig& config);

// Runs every sample on a bounded worker pool. A failing sample yields a
// record with `error` set; the run continues. Records come back in sample
// order regardless of completion order.
std::vector<EvalRecord> evaluate_samples(std::span<const QuerySample> samples,
                                         const RunConfig& config);

// Aggregates successful records (failures only counted).
EvalSummary summarize(std::span<const EvalRecord> records);
CompressionRate compression_rate(std::span<const EvalRecord> records);

std::string format_record(const EvalRecord& record);
EvalRecord parse_record(std::string_view line);
std::vector<EvalRecord> load_records(const std::filesystem::path& path);

// "metric,value" CSV preceded by a "# match_policy=..." header line.
void write_summary_csv(std::ostream& out, const EvalSummary& summary,
                       MatchPolicy policy);

struct RunOutputs {
  std::vector<EvalRecord> records;
  EvalSummary summary;
};

// Loads the dataset, evaluates it and writes <out>/records.jsonl and
// <out>/summary.csv. Throws "no samples" for an empty dataset.
RunOutputs run_eval(const std::filesystem::path& dataset,
                    const RunConfig& config,
                    const std::filesystem::path& out_dir);
RunOutputs run_eval(std::span<const QuerySample> samples,
                    const RunConfig& config,
                    const std::filesystem::path& out_dir);

}  // namespace attncomp

#endif  // ATTNCOMP_EVAL_H_

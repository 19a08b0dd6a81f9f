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

#include "attncomp/eval.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <thread>

#include "attncomp/confidence.h"
#include "attncomp/dataset.h"
#include "attncomp/error.h"
#include "json.hpp"

namespace attncomp {
using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Kept units rebuilt into documents for the reader, in retrieval order.
std::vector<Document> compressed_context(const QuerySample& sample,
                                         const std::vector<std::string>& kept,
                                         Granularity granularity) {
  std::vector<Document> out;
  for (const auto& doc : sample.documents) {
    if (granularity == Granularity::kDocument) {
      if (std::find(kept.begin(), kept.end(), doc.id) != kept.end()) {
        out.push_back(doc);
      }
      continue;
    }
    const auto sentences = split_sentences(doc.text);
    std::string text;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      const std::string id = doc.id + "#" + std::to_string(k);
      if (std::find(kept.begin(), kept.end(), id) == kept.end()) continue;
      if (!text.empty()) text += ' ';
      text += sentences[k];
    }
    if (!text.empty()) {
      Document d = doc;
      d.text = std::move(text);
      d.token_count = fallback_token_count(d.text);
      out.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace

EvalRecord evaluate_sample(const QuerySample& sample, std::size_t index,
                           const SampleScorer& scorer, const RunConfig& config) {
  EvalRecord record;
  record.index = index;
  record.query = sample.query;
  if (sample.relevance_labels) record.answerable = sample.has_relevant_document();

  const auto start = std::chrono::steady_clock::now();
  const SegmentScores scores = scorer.score(sample, index);
  const CompressionResult result = compress(scores, config.top_p);
  record.compression_seconds = seconds_since(start);

  for (const auto& d : scores.documents) record.tokens_retrieved += d.tokens;
  for (const auto& unit : scores.selectable()) {
    if (std::find(result.kept.begin(), result.kept.end(), unit.id) !=
        result.kept.end()) {
      record.tokens_compressed += unit.tokens;
    }
  }
  record.tokens_compressed = std::max<std::size_t>(record.tokens_compressed, 1);
  record.kept = result.kept;
  record.instruction_score = scores.instruction;
  record.confidence = confidence(scores);
  record.cumulative_score = result.cumulative_score;

  if (config.generator) {
    const auto docs = compressed_context(sample, result.kept, scorer.granularity());
    const auto gen_start = std::chrono::steady_clock::now();
    record.predicted = config.generator->generate(sample.query, docs);
    record.generation_seconds = seconds_since(gen_start);
    if (!sample.gold_answers.empty()) {
      record.f1 = token_f1(*record.predicted, sample.gold_answers);
      record.correct = answer_matches(config.match_policy, *record.predicted,
                                      sample.gold_answers);
    }
  }
  return record;
}

std::vector<EvalRecord> evaluate_samples(std::span<const QuerySample> samples,
                                         const RunConfig& config) {
  config.top_p.validate();
  const SampleScorer scorer(config.provider, config.head, config.granularity);
  std::vector<EvalRecord> records(samples.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      try {
        records[i] = evaluate_sample(samples[i], i, scorer, config);
      } catch (const std::exception& e) {
        records[i] = EvalRecord{};
        records[i].index = i;
        records[i].query = samples[i].query;
        records[i].error = e.what();
      }
    }
  };
  const int workers = std::max(
      1, std::min(config.parallelism, static_cast<int>(samples.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return records;
}

CompressionRate compression_rate(std::span<const EvalRecord> records) {
  std::vector<std::size_t> retrieved, compressed;
  for (const auto& r : records) {
    if (r.failed()) continue;
    retrieved.push_back(r.tokens_retrieved);
    compressed.push_back(r.tokens_compressed);
  }
  return compression_rate(retrieved, compressed);
}

EvalSummary summarize(std::span<const EvalRecord> records) {
  EvalSummary s;
  s.samples = records.size();
  double f1_sum = 0.0, correct_sum = 0.0;
  std::size_t f1_count = 0, correct_count = 0, ok = 0;
  for (const auto& r : records) {
    if (r.failed()) {
      ++s.failures;
      continue;
    }
    ++ok;
    s.mean_confidence += r.confidence;
    s.mean_kept += static_cast<double>(r.kept.size());
    s.mean_compression_seconds += r.compression_seconds;
    s.mean_generation_seconds += r.generation_seconds;
    if (r.f1) {
      f1_sum += *r.f1;
      ++f1_count;
    }
    if (r.correct) {
      correct_sum += *r.correct ? 1.0 : 0.0;
      ++correct_count;
    }
  }
  if (ok > 0) {
    const double n = static_cast<double>(ok);
    s.mean_confidence /= n;
    s.mean_kept /= n;
    s.mean_compression_seconds /= n;
    s.mean_generation_seconds /= n;
    s.rate = compression_rate(records);
  } else {
    s.rate = {0.0, true};
  }
  if (f1_count) s.mean_f1 = f1_sum / static_cast<double>(f1_count);
  if (correct_count) s.accuracy = correct_sum / static_cast<double>(correct_count);
  return s;
}

std::string format_record(const EvalRecord& r) {
  json j;
  j["index"] = r.index;
  j["query"] = r.query;
  if (r.failed()) {
    j["error"] = r.error;
    return j.dump();
  }
  j["tokens_retrieved"] = r.tokens_retrieved;
  j["tokens_compressed"] = r.tokens_compressed;
  j["kept"] = r.kept;
  j["instruction_score"] = r.instruction_score;
  j["confidence"] = r.confidence;
  j["cumulative_score"] = r.cumulative_score;
  if (r.answerable) j["answerable"] = *r.answerable;
  if (r.predicted) j["predicted"] = *r.predicted;
  if (r.f1) j["f1"] = *r.f1;
  if (r.correct) j["correct"] = *r.correct;
  j["compression_seconds"] = r.compression_seconds;
  j["generation_seconds"] = r.generation_seconds;
  return j.dump();
}

EvalRecord parse_record(std::string_view line) {
  EvalRecord r;
  try {
    const json j = json::parse(line);
    r.index = j.at("index").get<std::size_t>();
    r.query = j.value("query", std::string());
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
      return r;
    }
    r.tokens_retrieved = j.at("tokens_retrieved").get<std::size_t>();
    r.tokens_compressed = j.at("tokens_compressed").get<std::size_t>();
    r.kept = j.at("kept").get<std::vector<std::string>>();
    r.instruction_score = j.at("instruction_score").get<double>();
    r.confidence = j.at("confidence").get<double>();
    r.cumulative_score = j.at("cumulative_score").get<double>();
    if (j.contains("answerable")) r.answerable = j.at("answerable").get<bool>();
    if (j.contains("predicted")) r.predicted = j.at("predicted").get<std::string>();
    if (j.contains("f1")) r.f1 = j.at("f1").get<double>();
    if (j.contains("correct")) r.correct = j.at("correct").get<bool>();
    r.compression_seconds = j.value("compression_seconds", 0.0);
    r.generation_seconds = j.value("generation_seconds", 0.0);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed record: ") + e.what());
  }
  return r;
}

std::vector<EvalRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open records " + path.string());
  std::vector<EvalRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_record(line));
  }
  return records;
}

void write_summary_csv(std::ostream& out, const EvalSummary& s,
                       MatchPolicy policy) {
  out << "# match_policy=" << to_string(policy) << '\n';
  out << "metric,value\n";
  out << std::setprecision(12);
  out << "samples," << s.samples << '\n';
  out << "failures," << s.failures << '\n';
  out << "compression_rate," << (s.rate.infinite ? 0.0 : s.rate.rate) << '\n';
  out << "compression_rate_infinite," << (s.rate.infinite ? 1 : 0) << '\n';
  if (s.mean_f1) out << "mean_f1," << *s.mean_f1 << '\n';
  if (s.accuracy) out << "accuracy," << *s.accuracy << '\n';
  out << "mean_confidence," << s.mean_confidence << '\n';
  out << "mean_kept," << s.mean_kept << '\n';
  out << "mean_compression_seconds," << s.mean_compression_seconds << '\n';
  out << "mean_generation_seconds," << s.mean_generation_seconds << '\n';
}

RunOutputs run_eval(std::span<const QuerySample> samples,
                    const RunConfig& config,
                    const std::filesystem::path& out_dir) {
  if (samples.empty()) throw InvalidArgument("no samples");
  RunOutputs out;
  out.records = evaluate_samples(samples, config);
  out.summary = summarize(out.records);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir / "records.jsonl", std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot write records.jsonl");
    for (const auto& r : out.records) f << format_record(r) << '\n';
  }
  {
    std::ofstream f(out_dir / "summary.csv", std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot write summary.csv");
    write_summary_csv(f, out.summary, config.match_policy);
  }
  return out;
}

RunOutputs run_eval(const std::filesystem::path& dataset,
                    const RunConfig& config,
                    const std::filesystem::path& out_dir) {
  const auto samples = load_dataset(dataset);
  return run_eval(samples, config, out_dir);
}

}  // namespace attncomp

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

// attncomp command-line driver.
//
// Exit status: 0 success, 1 invalid input or failed check, 2 when a batch run
// finished but some samples failed.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attncomp/annotation.h"
#include "attncomp/confidence.h"
#include "attncomp/dataset.h"
#include "attncomp/error.h"
#include "attncomp/eval.h"
#include "attncomp/gradcheck.h"
#include "attncomp/provider.h"
#include "attncomp/synthetic.h"
#include "attncomp/trainer.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace attncomp;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kPartial = 2;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("ATTNCOMP_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return seed;
  } catch (const std::logic_error&) {
    throw InvalidArgument(std::string("ATTNCOMP_SEED is not an integer: ") + v);
  }
}

// An explicit flag wins, then ATTNCOMP_SEED, then the fallback.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value,
                           std::uint64_t fallback) {
  if (flag->count() > 0) return flag_value;
  return env_seed().value_or(fallback);
}

std::shared_ptr<const AttentionProvider> open_provider(std::string selector) {
  if (selector.starts_with("synthetic") && env_seed()) {
    selector += selector.find(':') == std::string::npos ? ":" : ",";
    selector += "seed=" + std::to_string(*env_seed());
  }
  return make_provider(selector);
}

TopPConfig top_p_config(double top_p, const CLI::Option* epsilon_flag,
                        double epsilon, Granularity granularity) {
  TopPConfig cfg{top_p, epsilon};
  if (epsilon_flag->count() == 0 && granularity == Granularity::kSentence) {
    cfg.epsilon = TopPConfig::kSentenceEpsilon;
  }
  cfg.validate();
  return cfg;
}

std::optional<CrossAttentionHead> load_weights(const std::string& dir) {
  if (dir.empty()) return std::nullopt;
  return init_from_export(dir);
}

std::vector<Document> pooled_corpus(std::span<const QuerySample> samples) {
  std::vector<Document> corpus;
  std::set<std::string> seen;
  for (const auto& s : samples) {
    for (const auto& d : s.documents) {
      if (seen.insert(d.id).second) corpus.push_back(d);
    }
  }
  return corpus;
}

void write_scores(const fs::path& path, std::span<const QuerySample> samples,
                  const SampleScorer& scorer) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nlohmann::json j;
    j["index"] = i;
    try {
      const auto scores = scorer.score(samples[i], i);
      j["instruction"] = scores.instruction;
      auto units = [](const std::vector<ScoredSegment>& segs) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& s : segs) a.push_back({{"id", s.id}, {"score", s.score}});
        return a;
      };
      j["documents"] = units(scores.documents);
      if (!scores.sentences.empty()) j["sentences"] = units(scores.sentences);
    } catch (const std::exception& e) {
      j["error"] = e.what();
    }
    out << j.dump() << '\n';
  }
}

int report_run(const RunOutputs& run, const fs::path& dir) {
  const auto& s = run.summary;
  std::cout << "samples=" << s.samples << " failures=" << s.failures
            << " compression_rate="
            << (s.rate.infinite ? std::string("inf") : std::to_string(s.rate.rate))
            << " mean_kept=" << s.mean_kept;
  if (s.accuracy) std::cout << " accuracy=" << *s.accuracy;
  if (s.mean_f1) std::cout << " f1=" << *s.mean_f1;
  std::cout << "\nwrote " << (dir / "records.jsonl").string() << '\n';
  for (const auto& r : run.records) {
    if (r.failed()) std::cerr << "sample " << r.index << ": " << r.error << '\n';
  }
  return s.failures > 0 ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-guided context compression"};
  app.require_subcommand(1);
  int status = kOk;

  // compress
  auto* compress_cmd = app.add_subcommand("compress", "Score and compress a dataset");
  std::string c_dataset, c_provider, c_granularity = "doc", c_out, c_weights;
  double c_top_p = 0.95, c_epsilon = 0.01;
  int c_parallelism = 1;
  compress_cmd->add_option("--dataset", c_dataset, "JSONL dataset")->required();
  compress_cmd->add_option("--provider", c_provider, "bundle:DIR or synthetic:SPEC")
      ->required();
  compress_cmd->add_option("--granularity", c_granularity)
      ->check(CLI::IsMember({"doc", "sentence"}));
  compress_cmd->add_option("--top-p", c_top_p);
  auto* c_eps_flag = compress_cmd->add_option("--epsilon", c_epsilon);
  compress_cmd->add_option("--out", c_out, "Output directory")->required();
  compress_cmd->add_option("--weights", c_weights, "Trained head directory");
  compress_cmd->add_option("--parallelism", c_parallelism);
  compress_cmd->callback([&] {
    const auto samples = load_dataset(c_dataset);
    RunConfig cfg;
    cfg.provider = open_provider(c_provider);
    cfg.head = load_weights(c_weights);
    cfg.granularity = granularity_from_string(c_granularity);
    cfg.top_p = top_p_config(c_top_p, c_eps_flag, c_epsilon, cfg.granularity);
    cfg.parallelism = c_parallelism;
    const auto run = run_eval(samples, cfg, c_out);
    write_scores(fs::path(c_out) / "scores.jsonl", samples,
                 SampleScorer(cfg.provider, cfg.head, cfg.granularity));
    status = report_run(run, c_out);
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the cross-attention head");
  std::string t_dataset, t_config, t_out, t_init;
  std::uint64_t t_seed = 0;
  int t_threads = 0;
  train_cmd->add_option("--dataset", t_dataset, "Directory of labeled bundles")
      ->required();
  train_cmd->add_option("--config", t_config, "key=value config file");
  auto* t_seed_flag = train_cmd->add_option("--seed", t_seed);
  train_cmd->add_option("--out", t_out, "Weights directory")->required();
  train_cmd->add_option("--init", t_init, "Starting weights directory");
  train_cmd->add_option("--threads", t_threads);
  train_cmd->callback([&] {
    TrainConfig cfg = t_config.empty() ? TrainConfig{} : load_train_config(t_config);
    cfg.seed = resolve_seed(t_seed_flag, t_seed, cfg.seed);
    if (t_threads > 0) cfg.threads = t_threads;
    cfg.validate();
    const auto data = load_training_bundles(t_dataset);
    const int d_model = static_cast<int>(data.front().bundle.context.cols());
    auto initial = t_init.empty() ? initial_head(cfg, d_model)
                                  : init_from_export(t_init);
    const auto result = train(data, cfg, std::move(initial));
    save_head(result.head, t_out);
    std::ofstream loss_out(fs::path(t_out) / "loss.csv", std::ios::trunc);
    write_loss_csv(loss_out, result.epochs);
    const auto& last = result.epochs.back();
    std::cout << "instances=" << data.size() << " epochs=" << result.epochs.size()
              << " final_loss=" << last.total << "\nwrote " << t_out << '\n';
  });

  // annotate
  auto* annotate_cmd = app.add_subcommand("annotate", "Derive relevance labels");
  std::string a_dataset, a_generator, a_out, a_provider = "synthetic:",
                                             a_weights, a_corpus;
  int a_shuffles = 3, a_parallelism = 1;
  double a_top_p = 0.95, a_epsilon = 1e-2;
  std::uint64_t a_seed = 0;
  annotate_cmd->add_option("--dataset", a_dataset)->required();
  annotate_cmd->add_option("--generator", a_generator, "echo | oracle | tcp:HOST:PORT")
      ->required();
  annotate_cmd->add_option("--shuffles", a_shuffles);
  annotate_cmd->add_option("--top-p", a_top_p);
  annotate_cmd->add_option("--epsilon", a_epsilon);
  annotate_cmd->add_option("--out", a_out, "Output JSONL")->required();
  annotate_cmd->add_option("--provider", a_provider);
  annotate_cmd->add_option("--weights", a_weights);
  annotate_cmd->add_option("--corpus", a_corpus, "JSONL whose documents form the negative pool");
  annotate_cmd->add_option("--parallelism", a_parallelism);
  auto* a_seed_flag = annotate_cmd->add_option("--seed", a_seed);
  annotate_cmd->callback([&] {
    const auto samples = load_dataset(a_dataset);
    AnnotationConfig cfg;
    cfg.shuffles = a_shuffles;
    cfg.top_p = {a_top_p, a_epsilon};
    cfg.seed = resolve_seed(a_seed_flag, a_seed, 0);
    cfg.validate();
    const auto corpus =
        a_corpus.empty() ? pooled_corpus(samples) : pooled_corpus(load_dataset(a_corpus));
    const SampleScorer scorer(open_provider(a_provider), load_weights(a_weights),
                              Granularity::kDocument);
    auto generator = make_generator(a_generator, samples);
    const auto results = annotate_dataset(
        samples,
        [&](std::size_t i) -> SubsetScorer {
          return [&, i](std::span<const Document> docs) {
            std::vector<std::string> ids;
            for (const auto& d : docs) ids.push_back(d.id);
            return scorer.score_subset(samples[i], i, ids);
          };
        },
        *generator, normalize_and_match, cfg, corpus, a_parallelism);
    std::ofstream out(a_out, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + a_out);
    std::size_t counts[3] = {0, 0, 0}, failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!results[i].outcome) {
        ++failures;
        std::cerr << "sample " << i << ": " << results[i].error << '\n';
        continue;
      }
      const auto& outcome = *results[i].outcome;
      ++counts[static_cast<int>(outcome.variant)];
      if (outcome.variant == AnnotationVariant::kDiscarded) continue;
      out << format_annotation(outcome) << '\n';
    }
    std::cout << "positive=" << counts[0] << " negative=" << counts[1]
              << " discarded=" << counts[2] << " failed=" << failures << '\n';
    status = failures > 0 ? kPartial : kOk;
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained head");
  std::string e_dataset, e_weights, e_generator, e_report, e_provider = "synthetic:",
                                                           e_granularity = "doc",
                                                           e_match = "contains";
  double e_top_p = 0.95, e_epsilon = 0.01;
  int e_parallelism = 1;
  eval_cmd->add_option("--dataset", e_dataset)->required();
  eval_cmd->add_option("--weights", e_weights)->required();
  eval_cmd->add_option("--generator", e_generator, "echo | oracle | tcp:HOST:PORT");
  eval_cmd->add_option("--report", e_report, "Report directory")->required();
  eval_cmd->add_option("--provider", e_provider);
  eval_cmd->add_option("--granularity", e_granularity)
      ->check(CLI::IsMember({"doc", "sentence"}));
  eval_cmd->add_option("--top-p", e_top_p);
  auto* e_eps_flag = eval_cmd->add_option("--epsilon", e_epsilon);
  eval_cmd->add_option("--match", e_match)->check(CLI::IsMember({"contains", "exact"}));
  eval_cmd->add_option("--parallelism", e_parallelism);
  eval_cmd->callback([&] {
    const auto samples = load_dataset(e_dataset);
    RunConfig cfg;
    cfg.provider = open_provider(e_provider);
    cfg.head = init_from_export(e_weights);
    cfg.granularity = granularity_from_string(e_granularity);
    cfg.top_p = top_p_config(e_top_p, e_eps_flag, e_epsilon, cfg.granularity);
    cfg.parallelism = e_parallelism;
    cfg.match_policy = match_policy_from_string(e_match);
    if (!e_generator.empty()) cfg.generator = make_generator(e_generator, samples);
    status = report_run(run_eval(samples, cfg, e_report), e_report);
  });

  // confidence-report
  auto* conf_cmd = app.add_subcommand("confidence-report", "Calibration of confidence");
  std::string r_records, r_out, r_metric = "auto", r_bins = "fixed";
  conf_cmd->add_option("--records", r_records, "records.jsonl from evaluate")->required();
  conf_cmd->add_option("--out", r_out, "CSV output")->required();
  conf_cmd->add_option("--metric", r_metric)
      ->check(CLI::IsMember({"auto", "f1", "correct", "answerable"}));
  conf_cmd->add_option("--bins", r_bins)->check(CLI::IsMember({"fixed", "quantile"}));
  conf_cmd->callback([&] {
    const auto records = load_records(r_records);
    std::string metric = r_metric;
    if (metric == "auto") {
      metric = "answerable";
      for (const auto& r : records) {
        if (r.f1) {
          metric = "f1";
          break;
        }
      }
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : records) {
      if (r.failed()) continue;
      std::optional<double> y;
      if (metric == "f1" && r.f1) y = *r.f1;
      if (metric == "correct" && r.correct) y = *r.correct ? 1.0 : 0.0;
      if (metric == "answerable" && r.answerable) y = *r.answerable ? 1.0 : 0.0;
      if (y) pairs.emplace_back(r.confidence, *y);
    }
    const auto report = calibration_report(
        pairs, r_bins == "fixed" ? BinMode::kFixedInterval : BinMode::kQuantile);
    std::ofstream out(r_out, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + r_out);
    write_calibration_csv(out, report);
    std::cout << "metric=" << metric << " samples=" << report.samples
              << " pearson_r=" << report.pearson_r
              << (report.degenerate ? " (degenerate)" : "") << '\n';
  });

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  std::uint64_t g_seed = 0;
  int g_instances = 50;
  auto* g_seed_flag = grad_cmd->add_option("--seed", g_seed);
  grad_cmd->add_option("--instances", g_instances);
  grad_cmd->callback([&] {
    const auto report = gradcheck(resolve_seed(g_seed_flag, g_seed, 0), g_instances);
    for (std::size_t i = 0; i < report.cases.size(); ++i) {
      const auto& c = report.cases[i];
      std::cout << "case " << i << " m=" << c.m << " n=" << c.n << " H=" << c.heads
                << " d_model=" << c.d_model << " d_a=" << c.d_a
                << " entries=" << c.entries << " max_rel_err=" << std::scientific
                << c.max_relative_error << std::defaultfloat << '\n';
    }
    std::cout << (report.passed ? "PASS" : "FAIL")
              << " max_rel_err=" << std::scientific << report.max_relative_error
              << '\n';
    status = report.passed ? kOk : kInvalid;
  });

  // make-synthetic
  auto* synth_cmd =
      app.add_subcommand("make-synthetic", "Write a planted-relevance dataset");
  std::size_t s_positives = 200, s_negatives = 0;
  std::uint64_t s_seed = 0;
  std::string s_dataset, s_bundles, s_provider = "synthetic:";
  synth_cmd->add_option("--positives", s_positives);
  synth_cmd->add_option("--negatives", s_negatives, "default: one per three positives");
  auto* s_seed_flag = synth_cmd->add_option("--seed", s_seed);
  synth_cmd->add_option("--dataset-out", s_dataset, "JSONL output")->required();
  synth_cmd->add_option("--bundles-out", s_bundles, "Training bundle directory");
  synth_cmd->add_option("--provider", s_provider, "synthetic:SPEC for the bundles");
  synth_cmd->callback([&] {
    const auto seed = resolve_seed(s_seed_flag, s_seed, 0);
    const std::size_t negatives =
        s_negatives > 0 ? s_negatives : negatives_for_positives(s_positives);
    const auto samples =
        planted_dataset(PlantedDatasetOptions{}, s_positives, negatives, seed);
    save_dataset(s_dataset, samples);
    if (!s_bundles.empty()) {
      const auto provider = open_provider(s_provider);
      save_training_bundles(s_bundles, training_instances(samples, *provider));
    }
    std::cout << "wrote " << samples.size() << " samples to " << s_dataset << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return status;
}

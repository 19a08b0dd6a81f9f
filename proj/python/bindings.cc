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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "attncomp/attention.h"
#include "attncomp/bundle.h"
#include "attncomp/confidence.h"
#include "attncomp/corpus.h"
#include "attncomp/cross_attention.h"
#include "attncomp/dataset.h"
#include "attncomp/error.h"
#include "attncomp/eval.h"
#include "attncomp/gradcheck.h"
#include "attncomp/metrics.h"
#include "attncomp/provider.h"
#include "attncomp/synthetic.h"
#include "attncomp/topp.h"
#include "attncomp/trainer.h"

namespace py = pybind11;
using namespace attncomp;

namespace {

std::vector<ScoredSegment> to_segments(
    const std::vector<std::pair<std::string, double>>& items) {
  std::vector<ScoredSegment> out;
  out.reserve(items.size());
  for (const auto& [id, score] : items) out.push_back({id, score, 0});
  return out;
}

py::dict scores_dict(const SegmentScores& s) {
  auto units = [](const std::vector<ScoredSegment>& segs) {
    py::list out;
    for (const auto& seg : segs) out.append(py::make_tuple(seg.id, seg.score));
    return out;
  };
  py::dict d;
  d["instruction"] = s.instruction;
  d["documents"] = units(s.documents);
  d["sentences"] = units(s.sentences);
  return d;
}

PromptLayout layout_from(const std::vector<std::tuple<std::string, std::string,
                                                      std::size_t, std::size_t>>& spans,
                         std::size_t query_tokens, const std::string& granularity) {
  std::vector<SegmentSpan> table;
  for (const auto& [kind, owner, start, end] : spans) {
    table.push_back({segment_kind_from_string(kind), owner, start, end});
  }
  return PromptLayout::from_spans(std::move(table), query_tokens,
                                  granularity_from_string(granularity));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attention-guided context compression";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<CompressionResult>(m, "CompressionResult")
      .def_readonly("kept", &CompressionResult::kept)
      .def_readonly("selection_order", &CompressionResult::selection_order)
      .def_readonly("cumulative_score", &CompressionResult::cumulative_score)
      .def("__repr__", [](const CompressionResult& r) {
        return "<CompressionResult kept=" + std::to_string(r.kept.size()) + ">";
      });

  m.def(
      "compress",
      [](double instruction_score,
         const std::vector<std::pair<std::string, double>>& segments,
         double top_p, double epsilon) {
        TopPConfig cfg{top_p, epsilon};
        cfg.validate();
        const auto segs = to_segments(segments);
        return compress(instruction_score, segs, cfg);
      },
      py::arg("instruction_score"), py::arg("segments"), py::arg("top_p") = 0.95,
      py::arg("epsilon") = 1e-2,
      "Top-P selection over (id, score) pairs given in retrieval order.");

  m.def(
      "segment_scores",
      [](const Matrix& attention,
         const std::vector<std::tuple<std::string, std::string, std::size_t,
                                      std::size_t>>& spans,
         const std::string& granularity) {
        const auto layout = layout_from(
            spans, static_cast<std::size_t>(attention.rows()), granularity);
        return scores_dict(
            segment_scores(AttentionMatrix::validated(attention), layout));
      },
      py::arg("attention"), py::arg("spans"), py::arg("granularity") = "doc",
      "Scores from an m x n attention matrix and a (kind, owner, start, end) "
      "span table.");

  m.def("split_sentences", &split_sentences, py::arg("text"));
  m.def("token_f1", [](const std::string& p, const std::vector<std::string>& g) {
    return token_f1(p, g);
  });
  m.def("normalize_answer", &normalize_answer);
  m.def("normalize_and_match",
        [](const std::string& p, const std::vector<std::string>& g) {
          return normalize_and_match(p, g);
        });
  m.def(
      "compression_rate",
      [](const std::vector<std::size_t>& retrieved,
         const std::vector<std::size_t>& compressed) {
        const auto r = compression_rate(retrieved, compressed);
        return r.infinite ? py::object(py::float_(INFINITY))
                          : py::object(py::float_(r.rate));
      },
      py::arg("retrieved"), py::arg("compressed"));
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson(x, y).first;
      },
      py::arg("x"), py::arg("y"));

  py::class_<CrossAttentionHead>(m, "CrossAttentionHead")
      .def_readonly("heads", &CrossAttentionHead::heads)
      .def_readonly("d_model", &CrossAttentionHead::d_model)
      .def_readonly("d_a", &CrossAttentionHead::d_a)
      .def_readwrite("w_query", &CrossAttentionHead::w_query)
      .def_readwrite("w_key", &CrossAttentionHead::w_key)
      .def("parameter_count", &CrossAttentionHead::parameter_count)
      .def("save", [](const CrossAttentionHead& h, const std::filesystem::path& dir) {
        save_head(h, dir);
      });
  m.def("init_random", &init_random, py::arg("heads"), py::arg("d_model"),
        py::arg("d_a"), py::arg("seed"));
  m.def("load_head", &init_from_export, py::arg("directory"));
  m.def(
      "attention",
      [](const CrossAttentionHead& head, const Matrix& context,
         const Matrix& query) {
        const std::vector<SegmentSpan> spans{
            {SegmentKind::kInstruction, "ctx", 0,
             static_cast<std::size_t>(context.rows())}};
        HiddenBundle b{context, query,
                       PromptLayout::from_spans(
                           spans, static_cast<std::size_t>(query.rows()),
                           Granularity::kDocument)};
        return forward(b, head).attention.weights();
      },
      py::arg("head"), py::arg("context"), py::arg("query"),
      "Head-averaged attention of query rows over context rows.");

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("threads", &TrainConfig::threads)
      .def_readwrite("heads", &TrainConfig::heads)
      .def_readwrite("head_dim", &TrainConfig::head_dim);

  m.def(
      "train_synthetic",
      [](std::size_t positives, std::size_t negatives, const TrainConfig& cfg,
         std::uint64_t data_seed) {
        const auto samples =
            planted_dataset(PlantedDatasetOptions{}, positives, negatives, data_seed);
        SyntheticProviderOptions opts;
        opts.seed = data_seed;
        const SyntheticProvider provider(opts);
        const auto data = training_instances(samples, provider);
        py::gil_scoped_release release;
        auto result = train(data, cfg, initial_head(cfg, opts.d_model));
        std::vector<double> losses;
        for (const auto& e : result.epochs) losses.push_back(e.total);
        return std::make_pair(std::move(result.head), losses);
      },
      py::arg("positives"), py::arg("negatives"), py::arg("config"),
      py::arg("data_seed") = 0,
      "Trains on a planted-relevance dataset; returns (head, per-epoch loss).");

  m.def(
      "gradcheck",
      [](std::uint64_t seed, int instances) {
        const auto r = gradcheck(seed, instances);
        return py::make_tuple(r.passed, r.max_relative_error);
      },
      py::arg("seed") = 0, py::arg("instances") = 50);

  m.def(
      "evaluate",
      [](const std::filesystem::path& dataset, const std::string& provider,
         const std::optional<std::filesystem::path>& weights,
         const std::filesystem::path& report, const std::string& granularity,
         double top_p, double epsilon, std::optional<std::string> generator) {
        const auto samples = load_dataset(dataset);
        RunConfig cfg;
        cfg.provider = make_provider(provider);
        if (weights) cfg.head = init_from_export(*weights);
        cfg.granularity = granularity_from_string(granularity);
        cfg.top_p = {top_p, epsilon};
        if (generator) cfg.generator = make_generator(*generator, samples);
        const auto run = run_eval(samples, cfg, report);
        py::dict d;
        d["samples"] = run.summary.samples;
        d["failures"] = run.summary.failures;
        d["compression_rate"] = run.summary.rate.rate;
        d["mean_kept"] = run.summary.mean_kept;
        d["mean_confidence"] = run.summary.mean_confidence;
        if (run.summary.accuracy) d["accuracy"] = *run.summary.accuracy;
        if (run.summary.mean_f1) d["mean_f1"] = *run.summary.mean_f1;
        return d;
      },
      py::arg("dataset"), py::arg("provider"), py::arg("weights") = py::none(),
      py::arg("report"), py::arg("granularity") = "doc", py::arg("top_p") = 0.95,
      py::arg("epsilon") = 1e-2, py::arg("generator") = py::none());

  m.def(
      "make_synthetic_dataset",
      [](const std::filesystem::path& path, std::size_t positives,
         std::size_t negatives, std::uint64_t seed) {
        save_dataset(path,
                     planted_dataset(PlantedDatasetOptions{}, positives, negatives, seed));
      },
      py::arg("path"), py::arg("positives"), py::arg("negatives"),
      py::arg("seed") = 0);

  m.def(
      "load_bundle",
      [](const std::filesystem::path& dir) {
        const auto b = load_bundle(dir);
        py::dict tensors;
        for (const auto& [name, t] : b.tensors) {
          std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
          py::array_t<float> arr(shape);
          std::copy(t.values.begin(), t.values.end(), arr.mutable_data());
          tensors[py::str(name)] = arr;
        }
        return tensors;
      },
      py::arg("directory"), "Validated tensors of a bundle directory.");
}

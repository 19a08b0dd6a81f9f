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

#include "attncomp/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "attncomp/error.h"
#include "attncomp/rng.h"

namespace attncomp {

GradcheckInstance random_gradcheck_instance(const GradcheckOptions& options,
                                            std::uint64_t seed) {
  Pcg64 rng(seed);
  const int m = 1 + static_cast<int>(rng.below(options.max_query_tokens));
  // At least one instruction token and one document token.
  const int n = 2 + static_cast<int>(rng.below(options.max_context_tokens - 1));
  const int heads = 1 + static_cast<int>(rng.below(options.max_heads));
  const int d_model =
      heads + static_cast<int>(rng.below(options.max_d_model - heads + 1));
  const int d_a = std::max(1, d_model / heads);

  std::vector<SegmentSpan> spans;
  const std::size_t ins = 1 + rng.below(static_cast<std::uint64_t>(n - 1));
  spans.push_back({SegmentKind::kInstruction, "ins", 0, ins});
  std::size_t pos = ins;
  int doc = 0;
  while (pos < static_cast<std::size_t>(n)) {
    const std::size_t len = 1 + rng.below(n - pos);
    spans.push_back({SegmentKind::kDocument, "d" + std::to_string(doc++), pos,
                     pos + len});
    pos += len;
  }
  auto layout = PromptLayout::from_spans(std::move(spans),
                                         static_cast<std::size_t>(m),
                                         Granularity::kDocument);

  Matrix context(n, d_model), query(m, d_model);
  for (Eigen::Index i = 0; i < context.size(); ++i) context(i) = rng.normal();
  for (Eigen::Index i = 0; i < query.size(); ++i) query(i) = rng.normal();

  std::vector<int> labels(layout.document_ids().size());
  for (auto& l : labels) l = static_cast<int>(rng.below(2));

  GradcheckInstance out{HiddenBundle{context, query, std::move(layout)},
                        init_random(heads, d_model, d_a, derive_seed(seed, 1)),
                        std::move(labels)};
  return out;
}

namespace {

double total_loss(const GradcheckInstance& inst, const CrossAttentionHead& head,
                  double lambda) {
  const auto result = forward(inst.bundle, head);
  const auto scores = segment_scores(result.attention, inst.bundle.layout);
  return loss(scores, inst.labels, lambda).total;
}

}  // namespace

GradcheckCase check_instance(const GradcheckInstance& inst,
                             const GradcheckOptions& options) {
  const auto grads =
      compute_gradients(inst.bundle, inst.head, inst.labels, options.lambda);
  GradcheckCase c;
  c.m = static_cast<int>(inst.bundle.query.rows());
  c.n = static_cast<int>(inst.bundle.context.rows());
  c.heads = inst.head.heads;
  c.d_model = inst.head.d_model;
  c.d_a = inst.head.d_a;

  CrossAttentionHead probe = inst.head;
  auto check = [&](std::vector<Matrix>& weights,
                   const std::vector<Matrix>& analytic) {
    for (std::size_t h = 0; h < weights.size(); ++h) {
      for (Eigen::Index k = 0; k < weights[h].size(); ++k) {
        const double saved = weights[h](k);
        weights[h](k) = saved + options.step;
        const double up = total_loss(inst, probe, options.lambda);
        weights[h](k) = saved - options.step;
        const double down = total_loss(inst, probe, options.lambda);
        weights[h](k) = saved;
        const double numeric = (up - down) / (2.0 * options.step);
        const double a = analytic[h](k);
        const double denom =
            std::max({std::abs(a), std::abs(numeric), options.floor});
        c.max_relative_error =
            std::max(c.max_relative_error, std::abs(a - numeric) / denom);
        c.max_abs_gradient = std::max(c.max_abs_gradient, std::abs(a));
        ++c.entries;
      }
    }
  };
  check(probe.w_query, grads.d_query);
  check(probe.w_key, grads.d_key);
  return c;
}

GradcheckReport gradcheck(std::uint64_t seed, int instances,
                          const GradcheckOptions& options) {
  if (instances <= 0) throw InvalidArgument("instances must be positive");
  if (options.max_query_tokens < 1 || options.max_context_tokens < 2 ||
      options.max_heads < 1 || options.max_d_model < options.max_heads) {
    throw InvalidArgument("invalid gradcheck bounds");
  }
  GradcheckReport report;
  for (int i = 0; i < instances; ++i) {
    const auto inst = random_gradcheck_instance(
        options, derive_seed(seed, static_cast<std::uint64_t>(i)));
    report.cases.push_back(check_instance(inst, options));
    report.max_relative_error =
        std::max(report.max_relative_error, report.cases.back().max_relative_error);
  }
  report.passed = report.max_relative_error <= options.tolerance;
  return report;
}

}  // namespace attncomp

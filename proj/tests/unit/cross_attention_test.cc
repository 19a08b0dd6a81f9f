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
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "attncomp/error.h"
#include "test_util.h"

namespace attncomp {
namespace {

HiddenBundle random_bundle(int m, int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix c(n, d), q(m, d);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = z(rng);
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = z(rng);
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 1},
                                 {SegmentKind::kDocument, "d1", 1,
                                  static_cast<std::size_t>(n)}};
  return {c, q, PromptLayout::from_spans(spans, m, Granularity::kDocument)};
}

CrossAttentionHead zero_head(int heads, int d, int d_a) {
  CrossAttentionHead h;
  h.heads = heads;
  h.d_model = d;
  h.d_a = d_a;
  h.w_query.assign(heads, Matrix::Zero(d, d_a));
  h.w_key.assign(heads, Matrix::Zero(d, d_a));
  return h;
}

TEST(ForwardTest, ZeroWeightsGiveUniform) {
  std::mt19937_64 rng(1);
  const auto b = random_bundle(3, 6, 4, rng);
  const auto a = forward(b, zero_head(2, 4, 2)).attention.weights();
  EXPECT_TRUE(a.isApproxToConstant(1.0 / 6, 1e-15));
}

TEST(ForwardTest, DuplicatedContextHalvesUniformEntries) {
  std::mt19937_64 rng(1);
  auto b = random_bundle(2, 4, 3, rng);
  Matrix doubled(8, 3);
  doubled << b.context, b.context;
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 1},
                                 {SegmentKind::kDocument, "d1", 1, 8}};
  HiddenBundle b2{doubled, b.query,
                  PromptLayout::from_spans(spans, 2, Granularity::kDocument)};
  const auto a = forward(b2, zero_head(1, 3, 3)).attention.weights();
  EXPECT_TRUE(a.isApproxToConstant(1.0 / 8, 1e-15));
}

TEST(ForwardTest, ScalarSoftmax) {
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 1},
                                 {SegmentKind::kDocument, "d1", 1, 2}};
  HiddenBundle b{Matrix{{1.0}, {2.0}}, Matrix{{1.0}},
                 PromptLayout::from_spans(spans, 1, Granularity::kDocument)};
  CrossAttentionHead h = zero_head(1, 1, 1);
  h.w_query[0](0, 0) = 1.0;
  h.w_key[0](0, 0) = 1.0;
  const auto a = forward(b, h).attention.weights();
  const double e1 = std::exp(1.0), e2 = std::exp(2.0);
  EXPECT_NEAR(a(0, 0), e1 / (e1 + e2), 1e-15);
  EXPECT_NEAR(a(0, 1), e2 / (e1 + e2), 1e-15);
  EXPECT_NEAR(a(0, 0), 0.2689, 1e-4);
  EXPECT_NEAR(a(0, 1), 0.7311, 1e-4);
}

TEST(ForwardTest, MatchesNaiveOracle) {
  std::mt19937_64 rng(3);
  const auto b = random_bundle(3, 7, 4, rng);
  const auto head = init_random(2, 4, 2, 9);
  const auto a = forward(b, head).attention.weights();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 7; ++j) {
      double acc = 0.0;
      for (int h = 0; h < 2; ++h) {
        std::vector<double> logits(7);
        for (int t = 0; t < 7; ++t) {
          double dot = 0.0;
          for (int k = 0; k < 2; ++k) {
            double qk = 0.0, kk = 0.0;
            for (int d = 0; d < 4; ++d) {
              qk += b.query(i, d) * head.w_query[h](d, k);
              kk += b.context(t, d) * head.w_key[h](d, k);
            }
            dot += qk * kk;
          }
          logits[t] = dot / std::sqrt(2.0);
        }
        double z = 0.0;
        for (double l : logits) z += std::exp(l);
        acc += std::exp(logits[j]) / z;
      }
      EXPECT_NEAR(a(i, j), acc / 2.0, 1e-12);
    }
  }
}

TEST(ForwardTest, RowStochasticAndShiftInvariant) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_bundle(3, 9, 6, rng);
    const auto head = init_random(3, 6, 2, trial);
    const auto r = forward(b, head, true);
    for (int i = 0; i < 3; ++i) ASSERT_NEAR(r.attention.weights().row(i).sum(), 1.0, 1e-9);
    ASSERT_TRUE(r.trace.has_value());
    // Shifting every logit in a row leaves the softmax unchanged.
    Matrix shifted = r.trace->logits[0].array() + 7.5;
    Matrix p(shifted.rows(), shifted.cols());
    for (int i = 0; i < shifted.rows(); ++i) {
      const double mx = shifted.row(i).maxCoeff();
      p.row(i) = (shifted.row(i).array() - mx).exp();
      p.row(i) /= p.row(i).sum();
    }
    ASSERT_TRUE(p.isApprox(r.trace->probabilities[0], 1e-12));
  }
}

TEST(ForwardTest, ContextPermutationPermutesColumns) {
  std::mt19937_64 rng(5);
  const auto b = random_bundle(2, 5, 4, rng);
  const auto head = init_random(2, 4, 2, 1);
  const std::vector<int> perm{4, 2, 0, 3, 1};
  HiddenBundle p = b;
  for (int j = 0; j < 5; ++j) p.context.row(j) = b.context.row(perm[j]);
  const auto a = forward(b, head).attention.weights();
  const auto ap = forward(p, head).attention.weights();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(ap(i, j), a(i, perm[j]), 1e-14);
  }
}

TEST(ForwardTest, DimensionMismatch) {
  std::mt19937_64 rng(6);
  const auto b = random_bundle(2, 5, 4, rng);
  EXPECT_THROW(forward(b, init_random(2, 6, 3, 0)), Error);
}

TEST(ForwardTest, OverflowReported) {
  std::mt19937_64 rng(6);
  const auto b = random_bundle(2, 5, 2, rng);
  auto head = zero_head(1, 2, 2);
  head.w_query[0].setConstant(1e200);
  head.w_key[0].setConstant(1e200);
  try {
    forward(b, head);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("numerical overflow"), std::string::npos);
  }
}

TEST(InitRandomTest, Deterministic) {
  EXPECT_EQ(init_random(2, 8, 4, 5), init_random(2, 8, 4, 5));
  EXPECT_FALSE(init_random(2, 8, 4, 5) == init_random(2, 8, 4, 6));
}

TEST(InitRandomTest, VarianceIsOneOverDModel) {
  const auto h = init_random(4, 64, 20, 3);  // 2 * 4 * 64 * 20 = 10240 entries
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto* ws : {&h.w_query, &h.w_key}) {
    for (const auto& w : *ws) {
      sum += w.sum();
      sq += w.squaredNorm();
      n += static_cast<std::size_t>(w.size());
    }
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(var, 1.0 / 64, 0.2 / 64);
  EXPECT_EQ(h.parameter_count(), 10240u);
}

TEST(HeadIoTest, RoundTripBitExact) {
  const auto dir = testing::scratch_dir("head_rt");
  const auto h = round_to_storage(init_random(3, 6, 2, 11));
  save_head(h, dir, 13, {1, 4, 7});
  const auto loaded = init_from_export(dir);
  EXPECT_EQ(loaded, h);
}

TEST(HeadIoTest, TruncatedPayloadRejected) {
  const auto dir = testing::scratch_dir("head_trunc");
  save_head(init_random(2, 4, 2, 1), dir);
  const auto file = dir / "W_Q.f32";
  std::filesystem::resize_file(file, std::filesystem::file_size(file) - 4);
  EXPECT_THROW(init_from_export(dir), Error);
}

TEST(HeadIoTest, CorruptedPayloadRejected) {
  const auto dir = testing::scratch_dir("head_corrupt");
  save_head(init_random(2, 4, 2, 1), dir);
  {
    std::fstream f(dir / "W_K.f32", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(5);
    f.put('\x7f');
  }
  EXPECT_THROW(init_from_export(dir), Error);
}

TEST(HeadIoTest, SixteenHeadsWideExport) {
  const auto dir = testing::scratch_dir("head_wide");
  const auto h = round_to_storage(init_random(16, 32, 128, 2));
  save_head(h, dir);
  const auto loaded = init_from_export(dir);
  EXPECT_EQ(loaded.heads, 16);
  EXPECT_EQ(loaded.d_a, 128);
  EXPECT_EQ(loaded, h);
}

}  // namespace
}  // namespace attncomp

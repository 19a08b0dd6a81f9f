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

#include "attncomp/topp.h"

#include <random>

#include <gtest/gtest.h>

#include "attncomp/error.h"
#include "topp_oracle.h"

namespace attncomp {
namespace {

std::vector<ScoredSegment> segs(std::initializer_list<double> scores) {
  std::vector<ScoredSegment> out;
  int k = 1;
  for (double s : scores) out.push_back({"d" + std::to_string(k++), s, 1});
  return out;
}

using Ids = std::vector<std::string>;

TEST(CompressTest, HandTrace) {
  const auto r = compress(0.1, segs({0.5, 0.25, 0.1, 0.05}), {0.8, 0.01});
  EXPECT_EQ(r.kept, (Ids{"d1", "d2"}));
  EXPECT_NEAR(r.cumulative_score, 0.85, 1e-12);
}

TEST(CompressTest, InstructionAloneMeetsThreshold) {
  const auto r = compress(0.96, segs({0.02, 0.01, 0.01}), {0.95, 0.0});
  EXPECT_TRUE(r.kept.empty());
  EXPECT_DOUBLE_EQ(r.cumulative_score, 0.96);
}

TEST(CompressTest, AllBelowEpsilon) {
  const auto r = compress(0.0, segs({0.004, 0.003}), {0.95, 0.01});
  EXPECT_TRUE(r.kept.empty());
}

TEST(CompressTest, LoopExhausts) {
  const auto r = compress(0.05, segs({0.4, 0.3, 0.25}), {0.99, 0.01});
  EXPECT_EQ(r.kept, (Ids{"d1", "d2", "d3"}));
  EXPECT_NEAR(r.cumulative_score, 1.0, 1e-12);
}

TEST(CompressTest, EmptyInput) {
  const auto r = compress(0.2, {}, {});
  EXPECT_TRUE(r.kept.empty());
}

TEST(CompressTest, KeptInOriginalOrderAndTiesToLowerIndex) {
  const auto r = compress(0.0, segs({0.1, 0.3, 0.3, 0.3}), {0.65, 0.0});
  EXPECT_EQ(r.selection_order, (Ids{"d2", "d3", "d4"}));
  EXPECT_EQ(r.kept, (Ids{"d2", "d3", "d4"}));
  const auto r2 = compress(0.0, segs({0.1, 0.3, 0.3, 0.3}), {0.5, 0.0});
  EXPECT_EQ(r2.kept, (Ids{"d2", "d3"}));
  const auto r3 = compress(0.0, segs({0.2, 0.5, 0.3}), {0.75, 0.0});
  EXPECT_EQ(r3.selection_order, (Ids{"d2", "d3"}));
  EXPECT_EQ(r3.kept, (Ids{"d2", "d3"}));
}

TEST(CompressTest, BreakCheckedBeforeAdding) {
  // Overshoot by the last-added score is allowed.
  const auto r = compress(0.5, segs({0.44, 0.06}), {0.9, 0.0});
  EXPECT_EQ(r.kept, (Ids{"d1"}));
  EXPECT_NEAR(r.cumulative_score, 0.94, 1e-12);
}

TEST(CompressTest, ConfigValidation) {
  EXPECT_THROW((TopPConfig{0.0, 0.01}.validate()), Error);
  EXPECT_THROW((TopPConfig{1.1, 0.01}.validate()), Error);
  EXPECT_THROW((TopPConfig{0.9, -0.1}.validate()), Error);
  EXPECT_NO_THROW((TopPConfig{1.0, 0.0}.validate()));
}

TEST(CompressTest, MatchesLiteralInterpreter) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto c = testing::random_topp_case(rng);
    const auto got = compress(c.instruction, c.segments, c.config);
    const auto want = testing::literal_top_p(c.instruction, c.segments, c.config);
    ASSERT_EQ(got.kept, want.kept) << "trial " << trial;
    ASSERT_EQ(got.selection_order, want.selection_order);
    ASSERT_DOUBLE_EQ(got.cumulative_score, want.cumulative_score);
  }
}

TEST(CompressTest, CumulativeScoreIsInstructionPlusKept) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = testing::random_topp_case(rng);
    const auto r = compress(c.instruction, c.segments, c.config);
    double sum = c.instruction;
    for (const auto& s : c.segments) {
      if (std::find(r.kept.begin(), r.kept.end(), s.id) != r.kept.end()) sum += s.score;
    }
    ASSERT_NEAR(r.cumulative_score, sum, 1e-9);
  }
}

TEST(CompressTest, MonotoneInP) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = testing::random_topp_case(rng);
    TopPConfig lo = c.config, hi = c.config;
    hi.top_p = std::min(1.0, lo.top_p + 0.1);
    const auto a = compress(c.instruction, c.segments, lo);
    const auto b = compress(c.instruction, c.segments, hi);
    for (const auto& id : a.kept) {
      ASSERT_NE(std::find(b.kept.begin(), b.kept.end(), id), b.kept.end());
    }
  }
}

TEST(CompressTest, ConcentratedMassKeepsNoMore) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double ins = 0.3 * u(rng);
    const int k = 2 + static_cast<int>(rng() % 8);
    const double mass = 1.0 - ins;
    std::vector<ScoredSegment> dispersed, concentrated;
    for (int i = 0; i < k; ++i) {
      dispersed.push_back({"d" + std::to_string(i), mass / k, 1});
      concentrated.push_back({"d" + std::to_string(i), i == 0 ? mass : 0.0, 1});
    }
    const TopPConfig cfg{0.5 + 0.5 * u(rng), 0.01 * u(rng)};
    ASSERT_LE(compress(ins, concentrated, cfg).kept.size(),
              compress(ins, dispersed, cfg).kept.size());
  }
}

}  // namespace
}  // namespace attncomp

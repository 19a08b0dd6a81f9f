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

#include "attncomp/corpus.h"

#include <cctype>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "attncomp/error.h"

namespace attncomp {
namespace {

std::vector<Document> docs_with_counts(std::initializer_list<std::size_t> counts) {
  std::vector<Document> docs;
  int k = 1;
  for (auto c : counts) {
    Document d;
    d.id = "d" + std::to_string(k++);
    d.text = "x";
    d.token_count = c;
    docs.push_back(d);
  }
  return docs;
}

TEST(AssembleLayoutTest, TwoDocuments) {
  const auto layout =
      assemble_layout(3, docs_with_counts({4, 5}), 2, Granularity::kDocument);
  ASSERT_EQ(layout.spans().size(), 3u);
  EXPECT_EQ(layout.spans()[0], (SegmentSpan{SegmentKind::kInstruction, "instruction", 0, 3}));
  EXPECT_EQ(layout.spans()[1].start, 3u);
  EXPECT_EQ(layout.spans()[1].end, 7u);
  EXPECT_EQ(layout.spans()[1].owner_id, "d1");
  EXPECT_EQ(layout.spans()[2].start, 7u);
  EXPECT_EQ(layout.spans()[2].end, 12u);
  EXPECT_EQ(layout.context_tokens(), 12u);
  EXPECT_EQ(layout.query_tokens(), 2u);
}

TEST(AssembleLayoutTest, MinimalCase) {
  const auto layout = assemble_layout(1, docs_with_counts({1}), 1, Granularity::kDocument);
  ASSERT_EQ(layout.spans().size(), 2u);
  EXPECT_EQ(layout.spans()[1].start, 1u);
  EXPECT_EQ(layout.spans()[1].end, 2u);
  EXPECT_EQ(layout.context_tokens(), 2u);
}

TEST(AssembleLayoutTest, EmptyDocumentsRejected) {
  try {
    assemble_layout(3, {}, 2, Granularity::kDocument);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no segments"), std::string::npos);
  }
}

// Counts words and terminal punctuation marks as separate tokens.
std::size_t punctuation_counter(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      ++count;
      in_word = false;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      in_word = false;
    } else if (!in_word) {
      ++count;
      in_word = true;
    }
  }
  return count;
}

TEST(AssembleLayoutTest, SentenceGranularity) {
  Document d = make_document("doc", "", "A. B.");
  const std::vector<Document> docs{d};
  const auto layout =
      assemble_layout(2, docs, 1, Granularity::kSentence, punctuation_counter);
  ASSERT_EQ(layout.spans().size(), 3u);
  for (int k = 1; k <= 2; ++k) {
    EXPECT_EQ(layout.spans()[k].kind, SegmentKind::kSentence);
    EXPECT_EQ(layout.spans()[k].owner_id, "doc");
    EXPECT_EQ(layout.spans()[k].size(), 2u);
  }
  EXPECT_EQ(layout.segment_id(1), "doc#0");
  EXPECT_EQ(layout.segment_id(2), "doc#1");
  EXPECT_EQ(layout.document_ids(), std::vector<std::string>{"doc"});
}

TEST(PromptLayoutTest, GapReportsRange) {
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 2},
                                 {SegmentKind::kDocument, "d1", 3, 5}};
  try {
    PromptLayout::from_spans(spans, 1, Granularity::kDocument);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("[2, 3)"), std::string::npos) << e.what();
  }
}

TEST(PromptLayoutTest, OverlapRejected) {
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 2},
                                 {SegmentKind::kDocument, "d1", 1, 5}};
  EXPECT_THROW(PromptLayout::from_spans(spans, 1, Granularity::kDocument), Error);
}

TEST(PromptLayoutTest, InstructionMustComeFirst) {
  std::vector<SegmentSpan> spans{{SegmentKind::kDocument, "d1", 0, 2},
                                 {SegmentKind::kInstruction, "ins", 2, 3}};
  EXPECT_THROW(PromptLayout::from_spans(spans, 1, Granularity::kDocument), Error);
}

TEST(PromptLayoutTest, DuplicateDocumentRejected) {
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 1},
                                 {SegmentKind::kDocument, "d1", 1, 2},
                                 {SegmentKind::kDocument, "d1", 2, 3}};
  EXPECT_THROW(PromptLayout::from_spans(spans, 1, Granularity::kDocument), Error);
}

TEST(PromptLayoutTest, ZeroQueryTokensRejected) {
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, 1},
                                 {SegmentKind::kDocument, "d1", 1, 2}};
  EXPECT_THROW(PromptLayout::from_spans(spans, 0, Granularity::kDocument), Error);
}

TEST(PromptLayoutTest, SpansSumToContextLength) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Document> docs;
    const int k = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < k; ++i) {
      Document d;
      d.id = "d" + std::to_string(i);
      d.text = "x";
      d.token_count = 1 + rng() % 9;
      docs.push_back(d);
    }
    const auto layout = assemble_layout(1 + rng() % 5, docs, 1 + rng() % 4,
                                        Granularity::kDocument);
    std::size_t total = 0;
    for (const auto& s : layout.spans()) total += s.size();
    ASSERT_EQ(total, layout.context_tokens());
    ASSERT_EQ(layout, assemble_layout(layout.instruction().size(), docs,
                                      layout.query_tokens(), Granularity::kDocument));
  }
}

TEST(SplitSentencesTest, TwoSentences) {
  EXPECT_EQ(split_sentences("A cat. A dog!"),
            (std::vector<std::string>{"A cat.", "A dog!"}));
}

TEST(SplitSentencesTest, NoTerminator) {
  EXPECT_EQ(split_sentences("No terminator"),
            std::vector<std::string>{"No terminator"});
}

TEST(SplitSentencesTest, Abbreviation) {
  EXPECT_EQ(split_sentences("Dr. Smith went home. He slept."),
            (std::vector<std::string>{"Dr. Smith went home.", "He slept."}));
}

TEST(SplitSentencesTest, WhitespaceOnlyIsEmpty) {
  EXPECT_TRUE(split_sentences("  \n\t ").empty());
}

TEST(SplitSentencesTest, LowercaseContinuationDoesNotSplit) {
  EXPECT_EQ(split_sentences("It costs 3. dollars more."),
            std::vector<std::string>{"It costs 3. dollars more."});
}

TEST(SplitSentencesTest, LosslessOnRandomText) {
  const std::string alphabet = "abcAB .!?\n";
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    const auto pieces = split_sentences_lossless(text);
    std::string joined;
    for (const auto& p : pieces) {
      ASSERT_FALSE(p.empty()) << '"' << text << '"';
      joined += p;
    }
    ASSERT_EQ(joined, text);
    for (const auto& s : split_sentences(text)) ASSERT_FALSE(s.empty());
  }
}

TEST(FallbackTokenCountTest, Examples) {
  EXPECT_EQ(fallback_token_count("two words"), 2u);
  EXPECT_EQ(fallback_token_count("one"), 1u);
  EXPECT_EQ(fallback_token_count("a  b   c"), 3u);
}

TEST(FallbackTokenCountTest, EmptyIsUntokenizable) {
  try {
    fallback_token_count("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("untokenizable"), std::string::npos);
  }
}

TEST(QuerySampleTest, LabelLengthMustMatch) {
  QuerySample s;
  s.query = "q";
  s.documents = {make_document("a", "", "text")};
  s.relevance_labels = std::vector<int>{1, 0};
  EXPECT_THROW(s.validate(), Error);
  s.relevance_labels = std::vector<int>{1};
  EXPECT_NO_THROW(s.validate());
  EXPECT_TRUE(s.has_relevant_document());
}

TEST(MakeDocumentTest, EmptyTextRejected) {
  EXPECT_THROW(make_document("a", "t", ""), Error);
  EXPECT_EQ(make_document("a", "t", "one two three").token_count, 3u);
  EXPECT_EQ(make_document("a", "t", "x", 17).token_count, 17u);
}

}  // namespace
}  // namespace attncomp

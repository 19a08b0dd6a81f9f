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

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "attncomp/error.h"

namespace attncomp {
namespace {

constexpr std::array<std::string_view, 24> kAbbreviations = {
    "dr", "mr", "mrs", "ms",  "prof", "sr",  "jr",  "st",
    "vs", "e.g", "i.e", "inc", "ltd", "co", "no",  "mt",
    "gen", "col", "lt", "sgt", "rev", "fig", "jan", "feb"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_abbreviation(std::string_view text, std::size_t period) {
  std::size_t begin = period;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  std::string word(text.substr(begin, period - begin));
  std::transform(word.begin(), word.end(), word.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.front())))
    word.erase(word.begin());
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) !=
         kAbbreviations.end();
}

}  // namespace

Document make_document(std::string id, std::string title, std::string text,
                       std::optional<std::size_t> token_count) {
  if (trim(text).empty()) {
    throw InvalidArgument("document '" + id + "' has empty text");
  }
  Document doc{std::move(id), std::move(title), std::move(text), 1};
  if (token_count) {
    if (*token_count == 0) {
      throw InvalidArgument("document '" + doc.id + "' has token_count 0");
    }
    doc.token_count = *token_count;
  } else {
    doc.token_count = fallback_token_count(doc.text);
  }
  return doc;
}

void QuerySample::validate() const {
  for (const auto& doc : documents) {
    if (trim(doc.text).empty()) {
      throw InvalidArgument("document '" + doc.id + "' has empty text");
    }
    if (doc.token_count == 0) {
      throw InvalidArgument("document '" + doc.id + "' has token_count 0");
    }
  }
  if (relevance_labels) {
    if (relevance_labels->size() != documents.size()) {
      throw InvalidArgument("relevance labels (" +
                            std::to_string(relevance_labels->size()) +
                            ") do not align with documents (" +
                            std::to_string(documents.size()) + ")");
    }
    for (int label : *relevance_labels) {
      if (label != 0 && label != 1) {
        throw InvalidArgument("relevance labels must be 0 or 1");
      }
    }
  }
}

bool QuerySample::has_relevant_document() const {
  return relevance_labels &&
         std::any_of(relevance_labels->begin(), relevance_labels->end(),
                     [](int r) { return r == 1; });
}

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kInstruction:
      return "instruction";
    case SegmentKind::kDocument:
      return "document";
    case SegmentKind::kSentence:
      return "sentence";
  }
  return "unknown";
}

SegmentKind segment_kind_from_string(std::string_view name) {
  if (name == "instruction") return SegmentKind::kInstruction;
  if (name == "document") return SegmentKind::kDocument;
  if (name == "sentence") return SegmentKind::kSentence;
  throw InvalidArgument("unknown segment kind '" + std::string(name) + "'");
}

std::string_view to_string(Granularity granularity) {
  return granularity == Granularity::kDocument ? "doc" : "sentence";
}

Granularity granularity_from_string(std::string_view name) {
  if (name == "doc" || name == "document") return Granularity::kDocument;
  if (name == "sentence") return Granularity::kSentence;
  throw InvalidArgument("unknown granularity '" + std::string(name) + "'");
}

PromptLayout PromptLayout::from_spans(std::vector<SegmentSpan> spans,
                                      std::size_t query_tokens,
                                      Granularity granularity) {
  if (query_tokens == 0) throw InvalidArgument("query must have >= 1 token");
  if (spans.empty() || spans.front().kind != SegmentKind::kInstruction) {
    throw InvalidArgument("layout must start with the instruction span");
  }
  const SegmentKind unit = granularity == Granularity::kDocument
                               ? SegmentKind::kDocument
                               : SegmentKind::kSentence;
  PromptLayout layout;
  layout.granularity_ = granularity;
  layout.m_ = query_tokens;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& span = spans[i];
    if (span.start >= span.end) {
      throw InvalidArgument("empty span [" + std::to_string(span.start) + ", " +
                            std::to_string(span.end) + ")");
    }
    if (span.start != cursor) {
      const auto lo = std::min(cursor, span.start);
      const auto hi = std::max(cursor, span.start);
      throw InvalidArgument(std::string(span.start > cursor ? "gap" : "overlap") +
                            " in span table at tokens [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + ")");
    }
    cursor = span.end;
    if (i == 0) {
      layout.span_doc_.push_back(-1);
      layout.sentence_rank_.push_back(0);
      continue;
    }
    if (span.kind != unit) {
      throw InvalidArgument("span " + std::to_string(i) + " has kind '" +
                            std::string(to_string(span.kind)) +
                            "' but layout granularity is '" +
                            std::string(to_string(granularity)) + "'");
    }
    auto& ids = layout.doc_ids_;
    auto it = std::find(ids.begin(), ids.end(), span.owner_id);
    const bool seen = it != ids.end();
    int doc_index;
    if (!seen) {
      ids.push_back(span.owner_id);
      doc_index = static_cast<int>(ids.size()) - 1;
      layout.sentence_rank_.push_back(0);
    } else {
      doc_index = static_cast<int>(it - ids.begin());
      if (layout.span_doc_.back() != doc_index) {
        throw InvalidArgument("spans of '" + span.owner_id +
                              "' are not contiguous");
      }
      layout.sentence_rank_.push_back(layout.sentence_rank_.back() + 1);
    }
    if (unit == SegmentKind::kDocument && seen) {
      throw InvalidArgument("document '" + span.owner_id +
                            "' appears in more than one span");
    }
    layout.span_doc_.push_back(doc_index);
  }
  layout.n_ = cursor;
  layout.spans_ = std::move(spans);
  return layout;
}

std::string PromptLayout::segment_id(std::size_t span_index) const {
  const auto& span = spans_.at(span_index);
  if (span.kind == SegmentKind::kSentence) {
    return span.owner_id + "#" + std::to_string(sentence_rank_[span_index]);
  }
  return span.owner_id;
}

std::vector<int> PromptLayout::column_documents() const {
  std::vector<int> columns(n_, 0);
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    std::fill(columns.begin() + static_cast<std::ptrdiff_t>(spans_[i].start),
              columns.begin() + static_cast<std::ptrdiff_t>(spans_[i].end),
              span_doc_[i] + 1);
  }
  return columns;
}

std::size_t fallback_token_count(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  if (words == 0) throw InvalidArgument("untokenizable: empty text");
  return words;
}

std::vector<std::string> split_sentences_lossless(std::string_view text) {
  std::vector<std::string> pieces;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t next = i + 1;
    while (next < text.size() && is_space(text[next])) ++next;
    if (next == i + 1 || next >= text.size()) continue;
    if (!std::isupper(static_cast<unsigned char>(text[next]))) continue;
    if (c == '.' && is_abbreviation(text, i)) continue;
    pieces.emplace_back(text.substr(begin, next - begin));
    begin = next;
    i = next - 1;
  }
  if (begin < text.size()) {
    pieces.emplace_back(text.substr(begin));
  }
  return pieces;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  for (const auto& piece : split_sentences_lossless(text)) {
    const auto trimmed = trim(piece);
    if (!trimmed.empty()) sentences.emplace_back(trimmed);
  }
  return sentences;
}

PromptLayout assemble_layout(std::size_t instruction_tokens,
                             std::span<const Document> documents,
                             std::size_t query_tokens, Granularity granularity,
                             const TokenCounter& counter) {
  if (instruction_tokens == 0 || query_tokens == 0) {
    throw InvalidArgument("token counts must be >= 1");
  }
  if (documents.empty() && granularity == Granularity::kDocument) {
    throw InvalidArgument("no segments");
  }
  std::vector<SegmentSpan> spans;
  spans.push_back({SegmentKind::kInstruction, "instruction", 0,
                   instruction_tokens});
  std::size_t cursor = instruction_tokens;
  for (const auto& doc : documents) {
    if (doc.token_count == 0) {
      throw InvalidArgument("document '" + doc.id + "' has token_count 0");
    }
    if (granularity == Granularity::kDocument) {
      spans.push_back(
          {SegmentKind::kDocument, doc.id, cursor, cursor + doc.token_count});
      cursor += doc.token_count;
      continue;
    }
    const auto sentences = split_sentences(doc.text);
    if (sentences.empty()) {
      throw InvalidArgument("document '" + doc.id + "' has no sentences");
    }
    for (const auto& sentence : sentences) {
      const std::size_t tokens = counter(sentence);
      if (tokens == 0) throw InvalidArgument("sentence with zero tokens");
      spans.push_back(
          {SegmentKind::kSentence, doc.id, cursor, cursor + tokens});
      cursor += tokens;
    }
  }
  return PromptLayout::from_spans(std::move(spans), query_tokens, granularity);
}

}  // namespace attncomp

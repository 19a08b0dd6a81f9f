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

#ifndef ATTNCOMP_CORPUS_H_
#define ATTNCOMP_CORPUS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attncomp {

struct Document {
  std::string id;
  std::string title;
  std::string text;
  std::size_t token_count = 1;
};

// Builds a Document, falling back to the whitespace word count when no
// tokenizer count is supplied. Throws on empty text.
Document make_document(std::string id, std::string title, std::string text,
                       std::optional<std::size_t> token_count = std::nullopt);

struct QuerySample {
  std::string query;
  std::vector<std::string> gold_answers;
  std::vector<Document> documents;  // retrieval rank order
  std::optional<std::vector<int>> relevance_labels;

  void validate() const;
  bool has_relevant_document() const;
};

enum class SegmentKind { kInstruction, kDocument, kSentence };
enum class Granularity { kDocument, kSentence };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view name);
std::string_view to_string(Granularity granularity);
Granularity granularity_from_string(std::string_view name);

struct SegmentSpan {
  SegmentKind kind = SegmentKind::kInstruction;
  std::string owner_id;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  std::size_t size() const { return end - start; }
  bool operator==(const SegmentSpan&) const = default;
};

// Token-span map of an assembled prompt. context_spans partition [0, n) with
// the instruction first and document (or sentence) spans in retrieval order.
// The query occupies m tokens after the context.
class PromptLayout {
 public:
  // Validates the partition invariant; a gap or overlap is reported with the
  // offending token range.
  static PromptLayout from_spans(std::vector<SegmentSpan> spans,
                                 std::size_t query_tokens,
                                 Granularity granularity);

  const std::vector<SegmentSpan>& spans() const { return spans_; }
  std::size_t context_tokens() const { return n_; }
  std::size_t query_tokens() const { return m_; }
  Granularity granularity() const { return granularity_; }
  const SegmentSpan& instruction() const { return spans_.front(); }

  // Distinct document owners in order of first appearance.
  const std::vector<std::string>& document_ids() const { return doc_ids_; }
  // Index into document_ids() for every non-instruction span (-1 for the
  // instruction span).
  const std::vector<int>& span_document() const { return span_doc_; }

  // Identifier of a span: the owner id for documents, "<owner>#<k>" for the
  // k-th sentence of a document (k counted from 0).
  std::string segment_id(std::size_t span_index) const;

  // Column -> segment map used by score aggregation: 0 is the instruction,
  // 1 + d is document d (sentences roll up into their owner).
  std::vector<int> column_documents() const;

  bool operator==(const PromptLayout&) const = default;

 private:
  std::vector<SegmentSpan> spans_;
  std::vector<std::string> doc_ids_;
  std::vector<int> span_doc_;
  std::vector<int> sentence_rank_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  Granularity granularity_ = Granularity::kDocument;
};

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Whitespace-delimited word count. Throws "untokenizable" for empty text.
std::size_t fallback_token_count(std::string_view text);

// Rule-based splitter: a sentence ends at '.', '?' or '!' followed by
// whitespace and an uppercase letter, unless the word before the period is a
// known abbreviation. Separating whitespace stays attached to the preceding
// sentence's tail, so concatenating the pieces reproduces the input minus
// leading/trailing whitespace; returned sentences themselves are trimmed.
std::vector<std::string> split_sentences(std::string_view text);

// Pieces whose concatenation is exactly `text` (whitespace kept on the
// preceding piece); split_sentences returns these trimmed.
std::vector<std::string> split_sentences_lossless(std::string_view text);

// Assembles instruction + documents into a layout. Sentence granularity
// splits each document's text and counts sentence tokens with `counter`.
PromptLayout assemble_layout(std::size_t instruction_tokens,
                             std::span<const Document> documents,
                             std::size_t query_tokens, Granularity granularity,
                             const TokenCounter& counter = fallback_token_count);

}  // namespace attncomp

#endif  // ATTNCOMP_CORPUS_H_

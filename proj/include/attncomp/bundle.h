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

#ifndef ATTNCOMP_BUNDLE_H_
#define ATTNCOMP_BUNDLE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attncomp/attention.h"
#include "attncomp/corpus.h"

namespace attncomp {

// On-disk layout: a directory with manifest.json and one raw payload per
// tensor (row-major, little-endian float32). Each payload's 64-bit FNV-1a
// checksum is recorded in the manifest as 16 lowercase hex digits.
//
// Tensor names understood by the library:
//   X_c [n, d_model], X_q [m, d_model]         hidden states
//   A   [m, n] or [H, m, n]                     raw attention (head stack)
//   W_Q, W_K [H, d_model, d_a]                  cross-attention weights

std::uint64_t fnv1a64(std::span<const std::byte> bytes);
std::string to_hex64(std::uint64_t value);

struct Tensor {
  std::vector<std::int64_t> dims;
  std::vector<float> values;

  std::int64_t element_count() const;
};

struct Manifest {
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t d_model = 0;
  std::int64_t heads = 0;
  std::int64_t d_a = 0;
  std::string dtype = "f32";
  std::vector<SegmentSpan> spans;
  std::string tokenizer = "none";
  int source_layer = -1;
  std::vector<int> head_indices;
  // Optional training labels aligned with the documents of the span table.
  std::optional<std::vector<int>> labels;

  struct TensorEntry {
    std::vector<std::int64_t> dims;
    std::string file;
    std::uint64_t fnv1a64 = 0;
  };
  std::map<std::string, TensorEntry> tensors;
};

class Bundle {
 public:
  Manifest manifest;
  std::map<std::string, Tensor> tensors;

  bool has(const std::string& name) const { return tensors.count(name) != 0; }
  const Tensor& tensor(const std::string& name) const;

  std::optional<PromptLayout> layout() const;
};

// Writes payloads first and the manifest last (via rename), so a directory
// without a manifest is never mistaken for a complete bundle. Fills in the
// manifest's tensor table.
void save_bundle(const std::filesystem::path& directory, Manifest manifest,
                 const std::map<std::string, Tensor>& tensors);

// Loads and validates everything (dims, byte lengths, checksums, span
// partition, row-stochastic attention) before returning.
Bundle load_bundle(const std::filesystem::path& directory);

Tensor tensor_from_matrix(const Matrix& matrix);
Tensor tensor_from_matrices(std::span<const Matrix> matrices);
// Slice `index` of a rank-3 tensor (or the whole of a rank-2 tensor).
Matrix matrix_from_tensor(const Tensor& tensor, std::int64_t index = 0);

}  // namespace attncomp

#endif  // ATTNCOMP_BUNDLE_H_

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

#include "attncomp/bundle.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "attncomp/error.h"
#include "json.hpp"

namespace attncomp {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::vector<std::byte> encode_f32(std::span<const float> values) {
  std::vector<std::byte> bytes(values.size() * sizeof(float));
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto word = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) {
      word = __builtin_bswap32(word);
    }
    std::memcpy(bytes.data() + i * sizeof(float), &word, sizeof(word));
  }
  return bytes;
}

std::vector<float> decode_f32(std::span<const std::byte> bytes) {
  std::vector<float> values(bytes.size() / sizeof(float));
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t word;
    std::memcpy(&word, bytes.data() + i * sizeof(float), sizeof(word));
    if constexpr (std::endian::native == std::endian::big) {
      word = __builtin_bswap32(word);
    }
    values[i] = std::bit_cast<float>(word);
  }
  return values;
}

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(size));
  if (!in) throw Error(ErrorCode::kIo, "short read on " + path.string());
  return bytes;
}

void write_file(const fs::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed on " + path.string());
}

std::int64_t product(const std::vector<std::int64_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::int64_t{1},
                         std::multiplies<>());
}

std::string dims_string(const std::vector<std::int64_t>& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

void expect_dims(const std::string& name, const std::vector<std::int64_t>& got,
                 const std::vector<std::int64_t>& want) {
  if (got != want) {
    throw DataLoss("tensor " + name + " has dims " + dims_string(got) +
                   ", manifest implies " + dims_string(want));
  }
}

Manifest parse_manifest(const json& j) {
  Manifest m;
  try {
    m.m = j.at("m").get<std::int64_t>();
    m.n = j.at("n").get<std::int64_t>();
    m.d_model = j.at("d_model").get<std::int64_t>();
    m.heads = j.at("H").get<std::int64_t>();
    m.d_a = j.at("d_a").get<std::int64_t>();
    m.dtype = j.at("dtype").get<std::string>();
    m.tokenizer = j.value("tokenizer", std::string("none"));
    m.source_layer = j.value("source_layer", -1);
    m.head_indices = j.value("head_indices", std::vector<int>{});
    if (j.contains("labels")) m.labels = j.at("labels").get<std::vector<int>>();
    for (const auto& s : j.at("spans")) {
      m.spans.push_back({segment_kind_from_string(s.at("kind").get<std::string>()),
                         s.at("owner").get<std::string>(),
                         s.at("start").get<std::size_t>(),
                         s.at("end").get<std::size_t>()});
    }
    for (const auto& [name, t] : j.at("tensors").items()) {
      Manifest::TensorEntry entry;
      entry.dims = t.at("dims").get<std::vector<std::int64_t>>();
      entry.file = t.at("file").get<std::string>();
      const auto hex = t.at("fnv1a64").get<std::string>();
      std::size_t used = 0;
      entry.fnv1a64 = std::stoull(hex, &used, 16);
      if (used != hex.size()) throw DataLoss("bad checksum '" + hex + "'");
      m.tensors.emplace(name, std::move(entry));
    }
  } catch (const json::exception& e) {
    throw DataLoss(std::string("malformed manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataLoss(std::string("malformed manifest: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw DataLoss(std::string("malformed manifest: ") + e.what());
  }
  if (m.dtype != "f32") throw DataLoss("unknown dtype '" + m.dtype + "'");
  return m;
}

json manifest_json(const Manifest& m) {
  json j;
  j["m"] = m.m;
  j["n"] = m.n;
  j["d_model"] = m.d_model;
  j["H"] = m.heads;
  j["d_a"] = m.d_a;
  j["dtype"] = m.dtype;
  json tensors = json::object();
  for (const auto& [name, entry] : m.tensors) {
    tensors[name] = {{"dims", entry.dims},
                     {"file", entry.file},
                     {"fnv1a64", to_hex64(entry.fnv1a64)}};
  }
  j["tensors"] = tensors;
  json spans = json::array();
  for (const auto& s : m.spans) {
    spans.push_back({{"kind", std::string(to_string(s.kind))},
                     {"owner", s.owner_id},
                     {"start", s.start},
                     {"end", s.end}});
  }
  j["spans"] = spans;
  j["tokenizer"] = m.tokenizer;
  j["source_layer"] = m.source_layer;
  j["head_indices"] = m.head_indices;
  if (m.labels) j["labels"] = *m.labels;
  return j;
}

Granularity span_granularity(const std::vector<SegmentSpan>& spans) {
  for (const auto& s : spans) {
    if (s.kind == SegmentKind::kSentence) return Granularity::kSentence;
  }
  return Granularity::kDocument;
}

void validate_bundle(const Bundle& bundle) {
  const auto& m = bundle.manifest;
  for (const auto& [name, tensor] : bundle.tensors) {
    if (name == "X_c") {
      expect_dims(name, tensor.dims, {m.n, m.d_model});
    } else if (name == "X_q") {
      expect_dims(name, tensor.dims, {m.m, m.d_model});
    } else if (name == "W_Q" || name == "W_K") {
      expect_dims(name, tensor.dims, {m.heads, m.d_model, m.d_a});
    } else if (name == "A") {
      if (tensor.dims.size() == 2) {
        expect_dims(name, tensor.dims, {m.m, m.n});
      } else {
        expect_dims(name, tensor.dims, {m.heads, m.m, m.n});
      }
      const std::int64_t count = tensor.dims.size() == 2 ? 1 : tensor.dims[0];
      for (std::int64_t h = 0; h < count; ++h) {
        AttentionMatrix::validated(matrix_from_tensor(tensor, h));
      }
    }
  }
  if (m.n > 0 || !m.spans.empty()) {
    const auto layout = PromptLayout::from_spans(
        m.spans, static_cast<std::size_t>(m.m), span_granularity(m.spans));
    if (static_cast<std::int64_t>(layout.context_tokens()) != m.n) {
      throw DataLoss("span table covers " +
                     std::to_string(layout.context_tokens()) +
                     " tokens but manifest n is " + std::to_string(m.n));
    }
    if (m.labels && m.labels->size() != layout.document_ids().size()) {
      throw DataLoss("labels do not align with documents in span table");
    }
  }
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t hash = kFnvOffset;
  for (std::byte b : bytes) {
    hash ^= static_cast<std::uint64_t>(b);
    hash *= kFnvPrime;
  }
  return hash;
}

std::string to_hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::int64_t Tensor::element_count() const { return product(dims); }

const Tensor& Bundle::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw InvalidArgument("bundle has no tensor '" + name + "'");
  }
  return it->second;
}

std::optional<PromptLayout> Bundle::layout() const {
  if (manifest.spans.empty()) return std::nullopt;
  return PromptLayout::from_spans(manifest.spans,
                                  static_cast<std::size_t>(manifest.m),
                                  span_granularity(manifest.spans));
}

void save_bundle(const fs::path& directory, Manifest manifest,
                 const std::map<std::string, Tensor>& tensors) {
  fs::create_directories(directory);
  manifest.tensors.clear();
  for (const auto& [name, tensor] : tensors) {
    if (tensor.element_count() != static_cast<std::int64_t>(tensor.values.size())) {
      throw InvalidArgument("tensor " + name + " has " +
                            std::to_string(tensor.values.size()) +
                            " values for dims " + dims_string(tensor.dims));
    }
    const auto bytes = encode_f32(tensor.values);
    const std::string file = name + ".f32";
    write_file(directory / file, bytes);
    manifest.tensors[name] = {tensor.dims, file, fnv1a64(bytes)};
  }
  Bundle check{manifest, tensors};
  validate_bundle(check);

  const auto text = manifest_json(manifest).dump(2) + "\n";
  const fs::path tmp = directory / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed on " + tmp.string());
  }
  fs::rename(tmp, directory / "manifest.json");
}

Bundle load_bundle(const fs::path& directory) {
  const fs::path manifest_path = directory / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorCode::kIo, "no manifest.json in " + directory.string());
  }
  json j;
  {
    std::ifstream in(manifest_path);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw DataLoss("manifest is not valid JSON: " + std::string(e.what()));
    }
  }
  Bundle bundle;
  bundle.manifest = parse_manifest(j);
  for (const auto& [name, entry] : bundle.manifest.tensors) {
    for (auto d : entry.dims) {
      if (d < 0) throw DataLoss("tensor " + name + " has a negative dim");
    }
    const auto bytes = read_file(directory / entry.file);
    const auto expected =
        static_cast<std::uint64_t>(product(entry.dims)) * sizeof(float);
    if (bytes.size() != expected) {
      throw DataLoss("tensor " + name + " payload is " +
                     std::to_string(bytes.size()) + " bytes, dims " +
                     dims_string(entry.dims) + " require " +
                     std::to_string(expected));
    }
    const auto checksum = fnv1a64(bytes);
    if (checksum != entry.fnv1a64) {
      throw DataLoss("checksum mismatch for tensor " + name + ": manifest " +
                     to_hex64(entry.fnv1a64) + ", payload " +
                     to_hex64(checksum));
    }
    bundle.tensors.emplace(name, Tensor{entry.dims, decode_f32(bytes)});
  }
  validate_bundle(bundle);
  return bundle;
}

Tensor tensor_from_matrix(const Matrix& matrix) {
  Tensor t;
  t.dims = {matrix.rows(), matrix.cols()};
  t.values.reserve(static_cast<std::size_t>(matrix.size()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      t.values.push_back(static_cast<float>(matrix(i, j)));
    }
  }
  return t;
}

Tensor tensor_from_matrices(std::span<const Matrix> matrices) {
  if (matrices.empty()) throw InvalidArgument("no matrices to pack");
  Tensor t;
  t.dims = {static_cast<std::int64_t>(matrices.size()), matrices[0].rows(),
            matrices[0].cols()};
  for (const auto& m : matrices) {
    if (m.rows() != matrices[0].rows() || m.cols() != matrices[0].cols()) {
      throw InvalidArgument("matrices to pack differ in shape");
    }
    const auto slice = tensor_from_matrix(m);
    t.values.insert(t.values.end(), slice.values.begin(), slice.values.end());
  }
  return t;
}

Matrix matrix_from_tensor(const Tensor& tensor, std::int64_t index) {
  std::int64_t rows, cols, offset;
  if (tensor.dims.size() == 2) {
    if (index != 0) throw InvalidArgument("rank-2 tensor has one slice");
    rows = tensor.dims[0];
    cols = tensor.dims[1];
    offset = 0;
  } else if (tensor.dims.size() == 3) {
    if (index < 0 || index >= tensor.dims[0]) {
      throw InvalidArgument("slice index out of range");
    }
    rows = tensor.dims[1];
    cols = tensor.dims[2];
    offset = index * rows * cols;
  } else {
    throw InvalidArgument("expected a rank-2 or rank-3 tensor");
  }
  Matrix m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::int64_t j = 0; j < cols; ++j) {
      m(i, j) = tensor.values[static_cast<std::size_t>(offset + i * cols + j)];
    }
  }
  return m;
}

}  // namespace attncomp

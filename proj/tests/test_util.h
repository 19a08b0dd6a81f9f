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

#ifndef ATTNCOMP_TESTS_TEST_UTIL_H_
#define ATTNCOMP_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "attncomp/attention.h"
#include "attncomp/corpus.h"

namespace attncomp::testing {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("attncomp_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Matrix random_stochastic(int m, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a(m, n);
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += a(i, j) = u(rng);
    a.row(i) /= sum;
  }
  return a;
}

inline std::vector<SegmentSpan> doc_spans(std::size_t instruction,
                                          std::initializer_list<std::size_t> docs) {
  std::vector<SegmentSpan> spans{{SegmentKind::kInstruction, "ins", 0, instruction}};
  std::size_t pos = instruction;
  int k = 1;
  for (auto len : docs) {
    spans.push_back({SegmentKind::kDocument, "d" + std::to_string(k++), pos, pos + len});
    pos += len;
  }
  return spans;
}

}  // namespace attncomp::testing

#endif  // ATTNCOMP_TESTS_TEST_UTIL_H_

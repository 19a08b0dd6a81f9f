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

#ifndef ATTNCOMP_DATASET_H_
#define ATTNCOMP_DATASET_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "attncomp/corpus.h"

namespace attncomp {

// One JSON object per line:
//   {"query": str, "answers": [str],
//    "documents": [{"id": str, "title": str, "text": str}],
//    "labels": [0|1]}            (labels optional)
// Token counts use the whitespace fallback unless a document carries an
// integer "token_count".
QuerySample parse_sample(std::string_view line);
std::string format_sample(const QuerySample& sample);

std::vector<QuerySample> read_dataset(std::istream& in);
std::vector<QuerySample> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path,
                  const std::vector<QuerySample>& samples);

}  // namespace attncomp

#endif  // ATTNCOMP_DATASET_H_

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

#include "attncomp/dataset.h"

#include <fstream>
#include <istream>

#include "attncomp/error.h"
#include "json.hpp"

namespace attncomp {
using json = nlohmann::json;

QuerySample parse_sample(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("invalid JSON: ") + e.what());
  }
  QuerySample sample;
  try {
    sample.query = j.at("query").get<std::string>();
    sample.gold_answers =
        j.value("answers", std::vector<std::string>{});
    std::size_t position = 0;
    for (const auto& d : j.at("documents")) {
      ++position;
      std::string id = d.contains("id") ? d.at("id").get<std::string>()
                                        : "d" + std::to_string(position);
      std::optional<std::size_t> tokens;
      if (d.contains("token_count")) tokens = d.at("token_count").get<std::size_t>();
      sample.documents.push_back(make_document(
          std::move(id), d.value("title", std::string()),
          d.at("text").get<std::string>(), tokens));
    }
    if (j.contains("labels")) {
      sample.relevance_labels = j.at("labels").get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed sample: ") + e.what());
  }
  if (sample.query.empty()) throw InvalidArgument("sample has an empty query");
  sample.validate();
  return sample;
}

std::string format_sample(const QuerySample& sample) {
  json j;
  j["query"] = sample.query;
  j["answers"] = sample.gold_answers;
  json docs = json::array();
  for (const auto& d : sample.documents) {
    docs.push_back({{"id", d.id},
                    {"title", d.title},
                    {"text", d.text},
                    {"token_count", d.token_count}});
  }
  j["documents"] = docs;
  if (sample.relevance_labels) j["labels"] = *sample.relevance_labels;
  return j.dump();
}

std::vector<QuerySample> read_dataset(std::istream& in) {
  std::vector<QuerySample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      samples.push_back(parse_sample(line));
    } catch (const Error& e) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

std::vector<QuerySample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path.string());
  return read_dataset(in);
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<QuerySample>& samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& s : samples) out << format_sample(s) << '\n';
}

}  // namespace attncomp

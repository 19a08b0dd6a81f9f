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

#ifndef ATTNCOMP_GENERATOR_H_
#define ATTNCOMP_GENERATOR_H_

#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attncomp/corpus.h"

namespace attncomp {

// Produces an answer string from a query and documents. Implementations must
// be safe to call from several threads.
class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  virtual std::string generate(const std::string& query,
                               std::span<const Document> documents) = 0;
};

class CallbackGenerator final : public GeneratorClient {
 public:
  using Callback =
      std::function<std::string(const std::string&, std::span<const Document>)>;
  explicit CallbackGenerator(Callback callback) : callback_(std::move(callback)) {}

  std::string generate(const std::string& query,
                       std::span<const Document> documents) override {
    return callback_(query, documents);
  }

 private:
  Callback callback_;
};

// Line protocol over TCP, one connection per request:
//   -> {"query": str, "documents": [{"title": str, "text": str}]}\n
//   <- {"answer": str}\n
class TcpGenerator final : public GeneratorClient {
 public:
  TcpGenerator(std::string host, int port,
               std::chrono::milliseconds timeout = std::chrono::seconds(120));

  std::string generate(const std::string& query,
                       std::span<const Document> documents) override;

 private:
  std::string host_;
  int port_;
  std::chrono::milliseconds timeout_;
};

// Caps the number of concurrent requests reaching the wrapped client.
class BoundedGenerator final : public GeneratorClient {
 public:
  BoundedGenerator(std::shared_ptr<GeneratorClient> inner, int max_in_flight);

  std::string generate(const std::string& query,
                       std::span<const Document> documents) override;

 private:
  std::shared_ptr<GeneratorClient> inner_;
  std::counting_semaphore<1024> slots_;
};

std::string format_generator_request(const std::string& query,
                                     std::span<const Document> documents);
std::string parse_generator_response(std::string_view line);

// Test doubles keyed on the dataset: "echo" answers the sample's first gold
// answer; "oracle" answers it only when every labeled-relevant document of the
// sample is present (and at least one exists), else "unknown".
std::shared_ptr<GeneratorClient> make_echo_generator(
    std::span<const QuerySample> dataset);
std::shared_ptr<GeneratorClient> make_oracle_generator(
    std::span<const QuerySample> dataset);

// "tcp:HOST:PORT", "echo" or "oracle".
std::shared_ptr<GeneratorClient> make_generator(
    std::string_view address, std::span<const QuerySample> dataset);

}  // namespace attncomp

#endif  // ATTNCOMP_GENERATOR_H_

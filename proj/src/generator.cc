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

#include "attncomp/generator.h"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <utility>

#include "attncomp/error.h"
#include "json.hpp"

namespace attncomp {
using json = nlohmann::json;

namespace {

Error GeneratorError(const std::string& message) {
  return Error(ErrorCode::kGenerator, message);
}

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket& operator=(Socket&&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

Socket connect_to(const std::string& host, int port,
                  std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found);
      rc != 0) {
    throw GeneratorError("cannot resolve " + host + ": " + gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> list(found,
                                                            ::freeaddrinfo);
  for (addrinfo* ai = list.get(); ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.get() < 0) continue;
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(s.get(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(s.get(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    if (::connect(s.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
      return s;
    }
  }
  throw GeneratorError("cannot connect to " + host + ":" + service);
}

std::map<std::string, QuerySample> index_by_query(
    std::span<const QuerySample> dataset) {
  std::map<std::string, QuerySample> index;
  for (const auto& s : dataset) index.emplace(s.query, s);
  return index;
}

}  // namespace

TcpGenerator::TcpGenerator(std::string host, int port,
                           std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {
  if (port_ <= 0 || port_ > 65535) throw InvalidArgument("invalid port");
}

std::string TcpGenerator::generate(const std::string& query,
                                   std::span<const Document> documents) {
  Socket sock = connect_to(host_, port_, timeout_);
  const std::string request = format_generator_request(query, documents) + "\n";
  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t n = ::send(sock.get(), request.data() + sent,
                             request.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw GeneratorError("send failed: " + std::string(std::strerror(errno)));
    sent += static_cast<std::size_t>(n);
  }
  std::string line;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(sock.get(), buf, sizeof(buf), 0);
    if (n < 0) throw GeneratorError("recv failed: " + std::string(std::strerror(errno)));
    if (n == 0) break;
    line.append(buf, static_cast<std::size_t>(n));
    if (line.find('\n') != std::string::npos) break;
  }
  const auto newline = line.find('\n');
  if (newline == std::string::npos && line.empty()) {
    throw GeneratorError("generator closed the connection without a response");
  }
  if (newline != std::string::npos) line.resize(newline);
  return parse_generator_response(line);
}

BoundedGenerator::BoundedGenerator(std::shared_ptr<GeneratorClient> inner,
                                   int max_in_flight)
    : inner_(std::move(inner)), slots_(std::clamp(max_in_flight, 1, 1024)) {
  if (!inner_) throw InvalidArgument("bounded generator needs a client");
}

std::string BoundedGenerator::generate(const std::string& query,
                                       std::span<const Document> documents) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->generate(query, documents);
}

std::string format_generator_request(const std::string& query,
                                     std::span<const Document> documents) {
  json docs = json::array();
  for (const auto& d : documents) {
    docs.push_back({{"title", d.title}, {"text", d.text}});
  }
  return json{{"query", query}, {"documents", docs}}.dump();
}

std::string parse_generator_response(std::string_view line) {
  try {
    return json::parse(line).at("answer").get<std::string>();
  } catch (const json::exception& e) {
    throw GeneratorError(std::string("malformed generator response: ") +
                         e.what());
  }
}

std::shared_ptr<GeneratorClient> make_echo_generator(
    std::span<const QuerySample> dataset) {
  return std::make_shared<CallbackGenerator>(
      [index = index_by_query(dataset)](const std::string& query,
                                        std::span<const Document>) {
        auto it = index.find(query);
        if (it == index.end() || it->second.gold_answers.empty()) {
          return std::string("unknown");
        }
        return it->second.gold_answers.front();
      });
}

std::shared_ptr<GeneratorClient> make_oracle_generator(
    std::span<const QuerySample> dataset) {
  return std::make_shared<CallbackGenerator>(
      [index = index_by_query(dataset)](const std::string& query,
                                        std::span<const Document> docs) {
        auto it = index.find(query);
        if (it == index.end()) return std::string("unknown");
        const QuerySample& s = it->second;
        if (!s.has_relevant_document() || s.gold_answers.empty()) {
          return std::string("unknown");
        }
        for (std::size_t i = 0; i < s.documents.size(); ++i) {
          if ((*s.relevance_labels)[i] != 1) continue;
          const auto& id = s.documents[i].id;
          if (std::none_of(docs.begin(), docs.end(),
                           [&](const Document& d) { return d.id == id; })) {
            return std::string("unknown");
          }
        }
        return s.gold_answers.front();
      });
}

std::shared_ptr<GeneratorClient> make_generator(
    std::string_view address, std::span<const QuerySample> dataset) {
  if (address == "echo") return make_echo_generator(dataset);
  if (address == "oracle") return make_oracle_generator(dataset);
  if (address.starts_with("tcp:")) {
    const auto rest = address.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos) {
      throw InvalidArgument("expected tcp:HOST:PORT");
    }
    int port = 0;
    try {
      port = std::stoi(std::string(rest.substr(colon + 1)));
    } catch (const std::logic_error&) {
      throw InvalidArgument("invalid port in '" + std::string(address) + "'");
    }
    return std::make_shared<TcpGenerator>(std::string(rest.substr(0, colon)),
                                          port);
  }
  throw InvalidArgument("unknown generator address '" + std::string(address) +
                        "'");
}

}  // namespace attncomp

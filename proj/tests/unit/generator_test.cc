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

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "attncomp/error.h"
#include "json.hpp"

namespace attncomp {
namespace {

// One-shot line server on an ephemeral loopback port.
class LineServer {
 public:
  explicit LineServer(std::function<std::string(const std::string&)> reply)
      : reply_(std::move(reply)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    ::listen(fd_, 4);
    thread_ = std::thread([this] {
      const int client = ::accept(fd_, nullptr, nullptr);
      if (client < 0) return;
      std::string line;
      char c;
      while (::recv(client, &c, 1, 0) == 1 && c != '\n') line += c;
      received = line;
      const std::string out = reply_(line);
      ::send(client, out.data(), out.size(), 0);
      ::close(client);
    });
  }
  ~LineServer() {
    thread_.join();
    ::close(fd_);
  }
  int port() const { return port_; }
  std::string received;

 private:
  std::function<std::string(const std::string&)> reply_;
  int fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

std::vector<Document> two_docs() {
  return {make_document("a", "Title A", "alpha text"),
          make_document("b", "Title B", "beta text")};
}

TEST(WireFormatTest, Request) {
  const auto docs = two_docs();
  const auto j = nlohmann::json::parse(format_generator_request("who?", docs));
  EXPECT_EQ(j["query"], "who?");
  ASSERT_EQ(j["documents"].size(), 2u);
  EXPECT_EQ(j["documents"][1]["title"], "Title B");
  EXPECT_EQ(j["documents"][1]["text"], "beta text");
}

TEST(WireFormatTest, Response) {
  EXPECT_EQ(parse_generator_response(R"({"answer":"Paris"})"), "Paris");
  EXPECT_THROW(parse_generator_response("nope"), Error);
  EXPECT_THROW(parse_generator_response(R"({"text":"x"})"), Error);
}

TEST(TcpGeneratorTest, RoundTrip) {
  LineServer server([](const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    return nlohmann::json{{"answer", "saw " + std::to_string(j["documents"].size())}}
               .dump() +
           "\n";
  });
  TcpGenerator gen("127.0.0.1", server.port(), std::chrono::seconds(5));
  const auto docs = two_docs();
  EXPECT_EQ(gen.generate("q", docs), "saw 2");
  EXPECT_NE(server.received.find("\"query\":\"q\""), std::string::npos);
}

TEST(TcpGeneratorTest, MalformedReply) {
  LineServer server([](const std::string&) { return std::string("garbage\n"); });
  TcpGenerator gen("127.0.0.1", server.port(), std::chrono::seconds(5));
  try {
    gen.generate("q", two_docs());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGenerator);
  }
}

TEST(TcpGeneratorTest, ConnectionRefused) {
  int port;
  {
    // Grab a free port, then close it.
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port = ntohs(addr.sin_port);
    ::close(fd);
  }
  TcpGenerator gen("127.0.0.1", port, std::chrono::seconds(1));
  EXPECT_THROW(gen.generate("q", two_docs()), Error);
}

TEST(BoundedGeneratorTest, LimitsInFlight) {
  std::atomic<int> in_flight{0}, peak{0};
  auto inner = std::make_shared<CallbackGenerator>(
      [&](const std::string&, std::span<const Document>) {
        const int now = ++in_flight;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --in_flight;
        return std::string("ok");
      });
  BoundedGenerator bounded(inner, 2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { bounded.generate("q", {}); });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
}

TEST(MakeGeneratorTest, EchoAndOracle) {
  QuerySample s;
  s.query = "q1";
  s.gold_answers = {"gold"};
  s.documents = two_docs();
  s.relevance_labels = std::vector<int>{0, 1};
  const std::vector<QuerySample> data{s};
  auto echo = make_generator("echo", data);
  EXPECT_EQ(echo->generate("q1", {}), "gold");
  EXPECT_EQ(echo->generate("other", {}), "unknown");
  auto oracle = make_generator("oracle", data);
  EXPECT_EQ(oracle->generate("q1", s.documents), "gold");
  EXPECT_EQ(oracle->generate("q1", std::span(s.documents).first(1)), "unknown");
  EXPECT_THROW(make_generator("tcp:localhost", data), Error);
  EXPECT_THROW(make_generator("smoke-signals", data), Error);
}

}  // namespace
}  // namespace attncomp

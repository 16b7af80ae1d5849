// Copyright 2026 The AnisoEval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "anisoeval/endpoint.hpp"
#include "anisoeval/errors.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/scheduler.hpp"
#include "anisoeval/scoring.hpp"

using namespace anisoeval;
using namespace anisoeval::endpoint;

namespace {

// Mock chat-completions server on an ephemeral port. The handler sees the
// parsed request body and returns (status, content).
class MockServer {
 public:
  using Handler = std::function<std::pair<int, std::string>(const Json&)>;

  explicit MockServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const Json body = Json::parse(req.body, nullptr, false);
      last_auth_ = req.get_header_value("Authorization");
      const auto [status, content] = handler_(body);
      res.status = status;
      if (status == 200) {
        const Json reply{
            {"choices", Json::array({Json{{"message", Json{{"role", "assistant"},
                                                            {"content", content}}}}})},
            {"usage", Json{{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
        res.set_content(reply.dump(), "application/json");
      } else {
        res.set_content("{}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  std::string last_auth() const { return last_auth_; }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::string last_auth_;
};

Sample text_sample(const std::string& id, const std::string& gold) {
  Sample s;
  s.id = id;
  s.cell = CapabilityCell{"d", "c"};
  s.prompt = "echo the reference answer";
  s.gold = std::vector<std::string>{gold};
  s.unit_cost = 1.0;
  return s;
}

ModelDescriptor endpoint_model(const std::string& url) {
  ModelDescriptor d;
  d.id = "mock-model";
  d.category = ModelCategory::Commercial;
  d.endpoint = url;
  d.provider = "MOCKTEST";
  return d;
}

}  // namespace

TEST_CASE("loopback echo of the gold answer scores 1.0 downstream") {
  std::string gold_text = "la respuesta";
  MockServer server([&](const Json&) { return std::make_pair(200, gold_text); });
  const auto descriptor = endpoint_model(server.url());

  const auto resp = endpoint_respond(descriptor, text_sample("s1", gold_text), 2000);
  CHECK(resp.content == gold_text);
  CHECK(resp.end_to_end_latency_ms > 0.0);
  CHECK(resp.prompt_tokens == 7);

  const auto scorer = scheduler::make_hybrid_scorer(
      [](const std::string& a, const std::string& b) {
        return scoring::ngram_cosine_similarity(a, b);
      },
      [](const std::string&, const std::string&) { return 0.0; });
  oracle::Response oresp;
  oresp.output = resp.content;
  const auto rec = scorer(text_sample("s1", gold_text), oresp);
  CHECK(rec.score == 1.0);
}

TEST_CASE("request body follows the chat-completions schema with temperature 0") {
  Json captured;
  MockServer server([&](const Json& body) {
    captured = body;
    return std::make_pair(200, std::string{"ok"});
  });
  const auto descriptor = endpoint_model(server.url());
  endpoint_respond(descriptor, text_sample("s1", "ok"), 2000);

  CHECK(captured["model"] == "mock-model");
  CHECK(captured["temperature"] == 0.0);
  CHECK(captured["max_tokens"] == 1024);
  REQUIRE(captured["messages"].is_array());
  CHECK(captured["messages"][0]["role"] == "user");
  const std::string content = captured["messages"][0]["content"].get<std::string>();
  CHECK(content.find("echo the reference answer") != std::string::npos);
}

TEST_CASE("auth token is read from RELE_API_KEY_<PROVIDER>") {
  ::setenv("RELE_API_KEY_MOCKTEST", "sekrit", 1);
  MockServer server([](const Json&) { return std::make_pair(200, std::string{"ok"}); });
  const auto descriptor = endpoint_model(server.url());
  CHECK(provider_key(descriptor) == "MOCKTEST");
  endpoint_respond(descriptor, text_sample("s1", "ok"), 2000);
  CHECK(server.last_auth() == "Bearer sekrit");
  ::unsetenv("RELE_API_KEY_MOCKTEST");

  // provider defaults to the sanitized endpoint host
  ModelDescriptor bare = descriptor;
  bare.provider.clear();
  CHECK(provider_key(bare) == "127_0_0_1");
}

TEST_CASE("HTTP 429 three times flags the sample as failed after the retries") {
  std::atomic<int> calls{0};
  MockServer server([&](const Json&) {
    ++calls;
    return std::make_pair(429, std::string{});
  });
  const auto descriptor = endpoint_model(server.url());

  // through the scheduler: kMaxAttempts attempts, then score 0 + flag
  std::vector<Sample> dataset = {text_sample("only", "gold")};
  const auto strata = build_strata(dataset);
  scheduler::SchedulerConfig config;
  config.rng_seed = 1;
  const auto run = scheduler::run_evaluation(
      "mock-model", dataset, strata, config,
      endpoint::make_endpoint_responder(descriptor, {2000, 64}),
      scheduler::make_hybrid_scorer(
          [](const std::string&, const std::string&) { return 0.0; },
          [](const std::string&, const std::string&) { return 0.0; }),
      scheduler::RunMode::FullSet);
  CHECK(calls == scheduler::kMaxAttempts);
  REQUIRE(run.records.size() == 1);
  CHECK(run.records[0].failed);
  CHECK(run.records[0].score == 0.0);
}

TEST_CASE("latency includes an artificial 50 ms server delay") {
  MockServer server([](const Json&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    return std::make_pair(200, std::string{"slow"});
  });
  const auto descriptor = endpoint_model(server.url());
  const auto start = std::chrono::steady_clock::now();
  const auto resp = endpoint_respond(descriptor, text_sample("s", "slow"), 5000);
  const double wall = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  CHECK(resp.end_to_end_latency_ms >= 50.0);
  // one worker: the recorded latency never exceeds the wall clock
  CHECK(resp.end_to_end_latency_ms <= wall);
}

TEST_CASE("malformed responses surface as MalformedResponse") {
  httplib::Server raw;
  raw.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content("{\"not\":\"chat shaped\"}", "application/json");
  });
  const int port = raw.bind_to_any_port("127.0.0.1");
  std::thread t([&] { raw.listen_after_bind(); });
  raw.wait_until_ready();
  const auto descriptor = endpoint_model(
      "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions");
  CHECK_THROWS_WITH_AS(endpoint_respond(descriptor, text_sample("s", "x"), 2000),
                       doctest::Contains("MalformedResponse"), Error);
  raw.stop();
  t.join();
}

TEST_CASE("unreachable endpoints raise transport errors") {
  const auto descriptor = endpoint_model("http://127.0.0.1:1/v1/chat/completions");
  CHECK_THROWS_AS(endpoint_respond(descriptor, text_sample("s", "x"), 500), Error);
}

TEST_CASE("latency accounting: recorded totals stay under wall-clock x workers") {
  MockServer server([](const Json&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    return std::make_pair(200, std::string{"gold"});
  });
  const auto descriptor = endpoint_model(server.url());

  std::vector<Sample> dataset;
  for (int i = 0; i < 12; ++i) dataset.push_back(text_sample("s" + std::to_string(i), "gold"));
  const auto strata = build_strata(dataset);
  scheduler::SchedulerConfig config;
  config.rng_seed = 2;
  config.workers = 4;

  const auto start = std::chrono::steady_clock::now();
  const auto run = scheduler::run_evaluation(
      "mock-model", dataset, strata, config,
      endpoint::make_endpoint_responder(descriptor, {2000, 64}),
      scheduler::make_hybrid_scorer(
          [](const std::string&, const std::string&) { return 0.0; },
          [](const std::string&, const std::string&) { return 0.0; }),
      scheduler::RunMode::FullSet);
  const double wall = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  double recorded = 0.0;
  for (const auto& rec : run.records) recorded += rec.latency_ms;
  CHECK(recorded <= wall * config.workers);
  CHECK(recorded > 0.0);
}

// Copyright 2026 The rubriceval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "builders.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/judge.hpp"
#include "rubriceval/prompt.hpp"
#include "test_util.hpp"

using namespace rubriceval;
using builders::item;

namespace {

// In-process chat-completion endpoint with a scriptable handler.
class MockServer {
public:
    using Handler = std::function<void(const httplib::Request&,
                                       httplib::Response&)>;

    explicit MockServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         ++hits_;
                         handler_(req, res);
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    }
    int hits() const { return hits_.load(); }

    static void reply_text(httplib::Response& res, const std::string& text) {
        nlohmann::json body;
        body["choices"] = {{{"message", {{"content", text}}}}};
        res.set_content(body.dump(), "application/json");
    }

private:
    Handler handler_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> hits_{0};
};

JudgeEndpoint fast_endpoint(const MockServer& server) {
    JudgeEndpoint ep;
    ep.base_url = server.base_url();
    ep.model_name = "mock-judge-model";
    ep.max_retries = 2;
    ep.backoff_base = std::chrono::milliseconds(1);
    ep.backoff_ceiling = std::chrono::milliseconds(20);
    return ep;
}

RubricSet demo_set() {
    return builders::set(
        "demo", {item("Covers renal dosing", Tier::kEssential, 2.0),
                 item("Mentions hydration", Tier::kImportant, 1.0),
                 item("Cites guidelines", Tier::kHighlight, 1.0),
                 item("Recommends double dosing", Tier::kPitfall, 2.0)});
}

std::string verdict_json(double e, double i, double h, double p) {
    nlohmann::json doc;
    doc["item_grades"] = {{"Covers renal dosing", e},
                          {"Mentions hydration", i},
                          {"Cites guidelines", h},
                          {"Recommends double dosing", p}};
    return doc.dump();
}

}  // namespace

TEST_CASE("the default scoring prompt embeds rubric and response") {
    const RubricSet set = demo_set();
    const std::string prompt =
        render_scoring_prompt(set, "The patient should stay hydrated.");
    CHECK(prompt.find(set.query) != std::string::npos);
    for (const auto& item : set.items) {
        CHECK(prompt.find(item.title) != std::string::npos);
    }
    CHECK(prompt.find("The patient should stay hydrated.") !=
          std::string::npos);
    // The instructions pin the raw grade scale the parser expects.
    CHECK(prompt.find("0") != std::string::npos);
    CHECK(prompt.find("2") != std::string::npos);
}

TEST_CASE("prompt templates render placeholders and reject unbound ones") {
    const PromptTemplate tpl("Grade {query} against {rubric} now.");
    const auto names = tpl.placeholders();
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "query");
    CHECK(names[1] == "rubric");
    CHECK(tpl.render({{"query", "Q"}, {"rubric", "R"}}) ==
          "Grade Q against R now.");
    CHECK_THROWS_AS(tpl.render({{"query", "Q"}}), InvalidConfig);
}

TEST_CASE("the mock judge is deterministic and grades by keyword coverage") {
    const RubricSet set = demo_set();
    const std::string response =
        "It covers renal dosing fully. It mentions hydration.";
    CHECK(mock_judge(set, response, 7) == mock_judge(set, response, 7));

    const ParsedVerdict verdict = mock_grade(set, response);
    CHECK(verdict.warnings.empty());
    CHECK(verdict.sheet.grades.size() == set.items.size());
    CHECK(verdict.sheet.query_id == set.query_id);
    // No response text matches a full or partial description here, so the
    // response never hits the pitfall.
    CHECK(verdict.sheet.grades.at("Recommends double dosing") == 0.0);
}

TEST_CASE("mock verdicts always parse back through parse_verdict") {
    const RubricSet set = demo_set();
    for (const char* response :
         {"", "Covers renal dosing.", "Hydration matters a lot here.",
          "A long answer touching many aspects of dosing and hydration."}) {
        const std::string raw = mock_judge(set, response);
        const ParsedVerdict verdict = parse_verdict(raw, set);
        CHECK(verdict.sheet.grades.size() == set.items.size());
    }
}

TEST_CASE("verdict parsing picks the trailing JSON object out of prose") {
    const RubricSet set = demo_set();
    const std::string reply =
        "Thinking out loud {not json} first...\n"
        "Here is my verdict:\n" +
        verdict_json(2, 1, 0, 0) + "\nDone.";
    const ParsedVerdict verdict = parse_verdict(reply, set);
    CHECK(verdict.sheet.grades.at("Covers renal dosing") == 1.0);
    CHECK(verdict.sheet.grades.at("Mentions hydration") == 0.5);
    CHECK(verdict.sheet.grades.at("Cites guidelines") == 0.0);
}

TEST_CASE("verdict parsing raises typed errors") {
    const RubricSet set = demo_set();
    CHECK_THROWS_AS(parse_verdict("no braces anywhere", set), NoJsonFound);
    CHECK_THROWS_AS(parse_verdict("{\"score_final\": 3}", set), PartialVerdict);
    CHECK_THROWS_AS(
        parse_verdict("{\"item_grades\": {\"Covers renal dosing\": 2}}", set),
        PartialVerdict);
    CHECK_THROWS_AS(
        parse_verdict("{\"item_grades\": {\"Phantom\": 2}}", set),
        UnknownItemTitle);

    nlohmann::json bad;
    bad["item_grades"] = {{"Covers renal dosing", 3},
                          {"Mentions hydration", 0},
                          {"Cites guidelines", 0},
                          {"Recommends double dosing", 0}};
    CHECK_THROWS_AS(parse_verdict(bad.dump(), set), OutOfRangeGrade);
}

TEST_CASE("subtotal cross-checks produce warnings, not failures") {
    const RubricSet set = demo_set();
    nlohmann::json doc = nlohmann::json::parse(verdict_json(2, 2, 0, 0));
    // Grades give Essential subtotal 4 (= grade 2 * weight 2) and total 6.
    doc["score_detail"] = {{"Essential Rubrics", 1.0}, {"Total", 9.0}};
    const ParsedVerdict verdict = parse_verdict(doc.dump(), set);
    CHECK(verdict.warnings.size() == 2);
    CHECK(verdict.document.score_detail.at("Essential Rubrics") == 1.0);
}

TEST_CASE("judge client round-trips a completion") {
    std::string seen_body;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        const auto body = nlohmann::json::parse(req.body);
        MockServer::reply_text(res, "graded: " +
            body.at("messages").at(0).at("content").get<std::string>());
    });
    JudgeClient client(fast_endpoint(server));
    const JudgeReply reply = client.complete("PROMPT-BODY");
    CHECK(reply.text == "graded: PROMPT-BODY");
    CHECK(reply.retries == 0);
    CHECK(server.hits() == 1);
    const auto request = nlohmann::json::parse(seen_body);
    CHECK(request.at("model") == "mock-judge-model");
    CHECK(request.at("temperature") == 0.0);
    CHECK(request.at("messages").at(0).at("role") == "user");
}

TEST_CASE("judge client forwards the bearer token") {
    std::string seen_auth;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        MockServer::reply_text(res, "ok");
    });
    JudgeEndpoint ep = fast_endpoint(server);
    ep.auth_token = "secret-token";
    JudgeClient client(ep);
    client.complete("p");
    CHECK(seen_auth == "Bearer secret-token");
}

TEST_CASE("judge client retries transient failures then succeeds") {
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        const int n = ++calls;
        if (n == 1) {
            res.status = 500;
        } else if (n == 2) {
            res.status = 429;
        } else {
            MockServer::reply_text(res, "finally");
        }
    });
    JudgeClient client(fast_endpoint(server));
    const JudgeReply reply = client.complete("p");
    CHECK(reply.text == "finally");
    CHECK(reply.retries == 2);
    CHECK(server.hits() == 3);
}

TEST_CASE("persistent server errors exhaust the retry budget") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
    });
    JudgeClient client(fast_endpoint(server));
    // max_retries = 2 means three attempts total.
    CHECK_THROWS_AS(client.complete("p"), ExhaustedRetries);
    CHECK(server.hits() == 3);
}

TEST_CASE("non-retryable statuses fail immediately") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 404;
    });
    JudgeClient client(fast_endpoint(server));
    CHECK_THROWS_AS(client.complete("p"), TransportError);
    CHECK(server.hits() == 1);
}

TEST_CASE("unreachable endpoints surface as exhausted retries") {
    JudgeEndpoint ep;
    // Port 1 on loopback has no listener; connections are refused fast.
    ep.base_url = "http://127.0.0.1:1/v1";
    ep.model_name = "m";
    ep.max_retries = 1;
    ep.backoff_base = std::chrono::milliseconds(1);
    ep.backoff_ceiling = std::chrono::milliseconds(5);
    ep.timeout = std::chrono::milliseconds(200);
    JudgeClient client(ep);
    CHECK_THROWS_AS(client.complete("p"), ExhaustedRetries);
}

TEST_CASE("the backoff ceiling bounds cumulative sleep") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    JudgeEndpoint ep = fast_endpoint(server);
    ep.max_retries = 6;
    ep.backoff_base = std::chrono::milliseconds(40);
    ep.backoff_ceiling = std::chrono::milliseconds(100);
    JudgeClient client(ep);
    const auto start = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(client.complete("p"), ExhaustedRetries);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    // Unbounded exponential backoff would sleep 40+80+160+320+640+1280 ms;
    // the ceiling keeps the total sleep at 100 ms plus request overhead.
    CHECK(elapsed.count() < 1000);
    CHECK(server.hits() == 7);
}

TEST_CASE("the concurrency gate holds parallel requests at the limit") {
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        const int now = ++in_flight;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        --in_flight;
        MockServer::reply_text(res, "ok");
    });
    JudgeEndpoint ep = fast_endpoint(server);
    ep.max_concurrency = 2;
    JudgeClient client(ep);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) {
        threads.emplace_back([&client] { client.complete("p"); });
    }
    for (auto& t : threads) t.join();
    CHECK(server.hits() == 6);
    CHECK(peak.load() <= 2);
}

TEST_CASE("auth_token_from_env reads the environment") {
    ::setenv("RUBRICEVAL_TEST_TOKEN", "abc123", 1);
    CHECK(auth_token_from_env("RUBRICEVAL_TEST_TOKEN") == "abc123");
    ::unsetenv("RUBRICEVAL_TEST_TOKEN");
    CHECK(auth_token_from_env("RUBRICEVAL_TEST_TOKEN").empty());
}

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

#ifndef RUBRICEVAL_JUDGE_HPP_
#define RUBRICEVAL_JUDGE_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rubriceval/rubric.hpp"

namespace rubriceval {

// One OpenAI-compatible chat-completions endpoint.
struct JudgeEndpoint {
    std::string base_url;    // e.g. "http://judge.internal:8000/v1"
    std::string model_name;
    std::string auth_token;  // empty -> no Authorization header
    double temperature = 0.0;
    int max_tokens = 4096;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;  // retry attempts after the first try
    int max_concurrency = 4;
    std::chrono::milliseconds backoff_base{200};
    // Bound on the cumulative backoff sleep across all retries of one call.
    std::chrono::milliseconds backoff_ceiling{5000};
};

struct JudgeReply {
    std::string text;  // assistant message content
    int retries = 0;   // retries consumed (0 = first attempt succeeded)
};

// Blocking chat client with retry on transport failures, 5xx and 429
// (exponential backoff, cumulative sleep bounded by backoff_ceiling) and a
// per-endpoint concurrency gate shared by all threads using this client.
// Non-retryable HTTP statuses throw TransportError immediately; a spent
// retry budget throws ExhaustedRetries carrying the last cause.
class JudgeClient {
public:
    explicit JudgeClient(JudgeEndpoint endpoint);
    ~JudgeClient();
    JudgeClient(const JudgeClient&) = delete;
    JudgeClient& operator=(const JudgeClient&) = delete;

    const JudgeEndpoint& endpoint() const;
    JudgeReply complete(const std::string& prompt);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Reads the bearer token for `env_var` from the environment (empty when
// unset). The CLI uses RUBRICEVAL_JUDGE_TOKEN.
std::string auth_token_from_env(const std::string& env_var);

// Structured form of the verdict JSON a judge emits.
struct VerdictDocument {
    std::map<std::string, double> item_grades;    // title -> raw 0/1/2
    std::map<std::string, double> score_detail;   // dimension -> raw subtotal
    std::optional<double> score_final;
};

struct ParsedVerdict {
    GradeSheet sheet;  // grades normalized to {0, 0.5, 1}
    VerdictDocument document;
    std::vector<std::string> warnings;  // e.g. subtotal/grade mismatches
};

// Extracts the last top-level JSON object from a judge reply (string-aware
// balance scan, so code fences and surrounding prose are tolerated) and
// validates it against `set`: every set title must be graded on the raw
// 0/1/2 scale. Throws NoJsonFound, PartialVerdict (missing/incomplete
// item_grades), UnknownItemTitle, or OutOfRangeGrade. Subtotals that
// disagree with the per-item grades produce warnings, not errors.
ParsedVerdict parse_verdict(const std::string& reply_text, const RubricSet& set);

// Deterministic judge stand-in: grades by keyword overlap between the
// response and each grade level's description (the 5 longest distinct words
// of >= 4 characters must all appear). FullyMet is tried before PartiallyMet
// (MajorError before MinorError for Pitfall); an empty response earns all
// zeros. The reply embeds the verdict JSON in seed-dependent prose, shaped
// exactly like a real judge reply so it round-trips through parse_verdict.
std::string mock_judge(const RubricSet& set, const std::string& response,
                       std::uint64_t seed = 0);

// Convenience: mock-grade and parse in one step.
ParsedVerdict mock_grade(const RubricSet& set, const std::string& response,
                         std::uint64_t seed = 0);

}  // namespace rubriceval

#endif  // RUBRICEVAL_JUDGE_HPP_

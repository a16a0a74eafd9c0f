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

#include "rubriceval/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "internal.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/report.hpp"

namespace rubriceval {

namespace {

using internal::njson;
using internal::normalize_key;

// ----- transport ----- //

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidConfig("base_url needs a scheme: " + base_url);
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.prefix = base_url.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') {
            out.prefix.pop_back();
        }
    }
    return out;
}

// Counting gate: bounds in-flight requests per endpoint.
class ConcurrencyGate {
public:
    explicit ConcurrencyGate(int slots) : slots_(slots > 0 ? slots : 1) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return slots_ > 0; });
        --slots_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

struct GateGuard {
    explicit GateGuard(ConcurrencyGate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateGuard() { gate_.release(); }
    ConcurrencyGate& gate_;
};

// ----- verdict helpers ----- //

std::optional<double> numeric_value(const njson& value) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        char* end = nullptr;
        const double parsed = std::strtod(s.c_str(), &end);
        if (!s.empty() && end == s.c_str() + s.size()) return parsed;
    }
    return std::nullopt;
}

std::optional<Tier> detail_key_to_tier(const std::string& key) {
    std::string norm = normalize_key(key);
    constexpr std::string_view kSuffix = "rubrics";
    if (norm.size() > kSuffix.size() &&
        norm.compare(norm.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0) {
        norm.resize(norm.size() - kSuffix.size());
    }
    return tier_from_string(norm);
}

const std::string& detail_key(Tier t) {
    static const std::map<Tier, std::string> kKeys = {
        {Tier::kEssential, "Essential Rubrics"},
        {Tier::kImportant, "Important Rubrics"},
        {Tier::kHighlight, "Highlight Rubrics"},
        {Tier::kPitfall, "Pitfall Rubrics"},
    };
    return kKeys.at(t);
}

// ----- mock judge ----- //

std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (const char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

// The 5 longest distinct words of at least 4 characters, ties broken by
// first appearance.
std::vector<std::string> level_phrases(const std::string& level_text) {
    std::vector<std::string> distinct;
    for (auto& word : words_of(level_text)) {
        if (word.size() < 4) continue;
        if (std::find(distinct.begin(), distinct.end(), word) == distinct.end()) {
            distinct.push_back(std::move(word));
        }
    }
    std::stable_sort(distinct.begin(), distinct.end(),
                     [](const std::string& a, const std::string& b) {
                         return a.size() > b.size();
                     });
    if (distinct.size() > 5) distinct.resize(5);
    return distinct;
}

bool level_matches(const std::vector<std::string>& response_words,
                   const std::string& level_text) {
    const std::vector<std::string> phrases = level_phrases(level_text);
    if (phrases.empty()) return false;  // nothing checkable never matches
    for (const auto& phrase : phrases) {
        if (std::find(response_words.begin(), response_words.end(), phrase) ==
            response_words.end()) {
            return false;
        }
    }
    return true;
}

int mock_raw_grade(const RubricItem& item,
                   const std::vector<std::string>& response_words) {
    // For Pitfall, FullyMet holds the Major Error standard and PartiallyMet
    // the Minor Error standard, so the ladder order is shared.
    if (level_matches(response_words, item.descriptions.at(GradeLevel::kFullyMet))) {
        return 2;
    }
    if (level_matches(response_words,
                      item.descriptions.at(GradeLevel::kPartiallyMet))) {
        return 1;
    }
    return 0;
}

}  // namespace

// ----- JudgeClient ----- //

struct JudgeClient::Impl {
    JudgeEndpoint endpoint;
    SplitUrl url;
    ConcurrencyGate gate;

    Impl(JudgeEndpoint e)
        : endpoint(std::move(e)),
          url(split_base_url(endpoint.base_url)),
          gate(endpoint.max_concurrency) {}
};

JudgeClient::JudgeClient(JudgeEndpoint endpoint)
    : impl_(std::make_unique<Impl>(std::move(endpoint))) {
    if (impl_->endpoint.model_name.empty()) {
        throw InvalidConfig("judge endpoint needs a model name");
    }
    if (impl_->endpoint.max_retries < 0) {
        throw InvalidConfig("max_retries must be >= 0");
    }
}

JudgeClient::~JudgeClient() = default;

const JudgeEndpoint& JudgeClient::endpoint() const { return impl_->endpoint; }

JudgeReply JudgeClient::complete(const std::string& prompt) {
    const JudgeEndpoint& ep = impl_->endpoint;
    GateGuard guard(impl_->gate);

    njson request;
    request["model"] = ep.model_name;
    request["messages"] = njson::array({njson{{"role", "user"}, {"content", prompt}}});
    request["temperature"] = ep.temperature;
    request["max_tokens"] = ep.max_tokens;
    const std::string body = request.dump();
    const std::string path = impl_->url.prefix + "/chat/completions";

    auto remaining_backoff = ep.backoff_ceiling;
    std::string last_cause = "no attempt made";
    for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
        if (attempt > 0) {
            std::chrono::milliseconds sleep =
                ep.backoff_base * (1LL << (attempt - 1));
            sleep = std::min(sleep, remaining_backoff);
            if (sleep.count() > 0) {
                std::this_thread::sleep_for(sleep);
                remaining_backoff -= sleep;
            }
        }

        httplib::Client client(impl_->url.origin);
        client.set_connection_timeout(ep.timeout);
        client.set_read_timeout(ep.timeout);
        client.set_write_timeout(ep.timeout);
        httplib::Headers headers;
        if (!ep.auth_token.empty()) {
            headers.emplace("Authorization", "Bearer " + ep.auth_token);
        }

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_cause = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429) {
            last_cause = RateLimited("endpoint returned 429").what();
            continue;
        }
        if (res->status >= 500) {
            last_cause = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("status " + std::to_string(res->status) +
                                 " from " + impl_->url.origin + path);
        }
        try {
            const njson reply = njson::parse(res->body);
            const njson& choices = reply.at("choices");
            if (!choices.is_array() || choices.empty()) {
                last_cause = "completion body carries no choices";
                continue;
            }
            const njson& content = choices.at(0).at("message").at("content");
            if (!content.is_string()) {
                last_cause = "completion content is not a string";
                continue;
            }
            return JudgeReply{content.get<std::string>(), attempt};
        } catch (const njson::exception& e) {
            last_cause = std::string("unparseable completion body: ") + e.what();
            continue;
        }
    }
    throw ExhaustedRetries(ep.max_retries + 1, last_cause);
}

std::string auth_token_from_env(const std::string& env_var) {
    const char* value = std::getenv(env_var.c_str());
    return value == nullptr ? std::string{} : std::string{value};
}

// ----- verdict parsing ----- //

ParsedVerdict parse_verdict(const std::string& reply_text, const RubricSet& set) {
    const std::vector<std::string> blocks =
        internal::json_object_candidates(reply_text);
    njson doc;
    bool parsed = false;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        try {
            doc = njson::parse(*it);
            if (doc.is_object()) {
                parsed = true;
                break;
            }
        } catch (const njson::parse_error&) {
            continue;  // prose braces; try the previous block
        }
    }
    if (!parsed) {
        std::string head = reply_text.substr(0, 80);
        throw NoJsonFound(head);
    }

    ParsedVerdict out;
    const njson* item_grades = nullptr;
    for (const auto& [key, value] : doc.items()) {
        const std::string norm = normalize_key(key);
        if (norm == "itemgrades" || norm == "grades") {
            if (value.is_object()) item_grades = &value;
        } else if (norm == "scoredetail") {
            if (!value.is_object()) continue;
            for (const auto& [dkey, dvalue] : value.items()) {
                const auto num = numeric_value(dvalue);
                if (!num) continue;
                if (normalize_key(dkey) == "total") {
                    out.document.score_detail["Total"] = *num;
                } else if (const auto tier = detail_key_to_tier(dkey); tier) {
                    out.document.score_detail[detail_key(*tier)] = *num;
                }
            }
        } else if (norm == "scorefinal") {
            if (const auto num = numeric_value(value); num) {
                out.document.score_final = *num;
            }
        }
    }
    if (item_grades == nullptr) {
        throw PartialVerdict(out.document.score_detail.empty()
                                 ? "no item_grades object in verdict"
                                 : "only dimension subtotals present");
    }

    for (const auto& [title, value] : item_grades->items()) {
        if (set.find_item(title) == nullptr) {
            throw UnknownItemTitle(title);
        }
        const auto num = numeric_value(value);
        if (!num) {
            throw OutOfRangeGrade(title, std::nan(""));
        }
        const double raw = *num;
        if (std::fabs(raw - 0.0) > 1e-9 && std::fabs(raw - 1.0) > 1e-9 &&
            std::fabs(raw - 2.0) > 1e-9) {
            throw OutOfRangeGrade(title, raw);
        }
        out.document.item_grades[title] = std::round(raw);
        out.sheet.grades[title] = normalize_grade(std::round(raw));
    }
    for (const auto& item : set.items) {
        if (!out.sheet.grades.count(item.title)) {
            throw PartialVerdict("verdict misses item \"" + item.title + "\"");
        }
    }
    out.sheet.query_id = set.query_id;

    // Cross-check reported subtotals against the per-item grades.
    std::map<Tier, double> recomputed;
    for (const auto& item : set.items) {
        recomputed[item.tier] +=
            out.document.item_grades.at(item.title) * item.weight;
    }
    double total = 0.0;
    for (const Tier t : {Tier::kEssential, Tier::kImportant, Tier::kHighlight}) {
        total += recomputed[t];
    }
    total -= recomputed[Tier::kPitfall];
    for (const auto& [key, reported] : out.document.score_detail) {
        double expected = total;
        if (key != "Total") {
            for (const Tier t : {Tier::kEssential, Tier::kImportant,
                                 Tier::kHighlight, Tier::kPitfall}) {
                if (key == detail_key(t)) expected = recomputed[t];
            }
        }
        if (std::fabs(reported - expected) > 1e-6) {
            out.warnings.push_back("subtotal \"" + key + "\" reports " +
                                   internal::fixed(reported, 3) +
                                   " but grades give " +
                                   internal::fixed(expected, 3));
        }
    }
    if (out.document.score_final &&
        std::fabs(*out.document.score_final - total) > 1e-6) {
        out.warnings.push_back("score_final reports " +
                               internal::fixed(*out.document.score_final, 3) +
                               " but grades give " + internal::fixed(total, 3));
    }
    return out;
}

// ----- mock judge ----- //

std::string mock_judge(const RubricSet& set, const std::string& response,
                       std::uint64_t seed) {
    const std::vector<std::string> response_words = words_of(response);

    njson grades;
    std::map<Tier, double> subtotal;
    for (const auto& item : set.items) {
        const int raw = response.empty() ? 0 : mock_raw_grade(item, response_words);
        grades[item.title] = raw;
        subtotal[item.tier] += raw * item.weight;
    }
    double total = 0.0;
    for (const Tier t : {Tier::kEssential, Tier::kImportant, Tier::kHighlight}) {
        total += subtotal[t];
    }
    total -= subtotal[Tier::kPitfall];

    njson verdict;
    njson detail;
    for (const Tier t : {Tier::kEssential, Tier::kImportant, Tier::kHighlight,
                         Tier::kPitfall}) {
        detail[detail_key(t)] = subtotal[t];
    }
    detail["Total"] = total;
    verdict["score_detail"] = std::move(detail);
    verdict["item_grades"] = std::move(grades);
    verdict["score_final"] = total;
    const std::string verdict_json = verdict.dump();

    const std::uint64_t h =
        internal::mix64(internal::hash_string(set.query, seed) ^
                        internal::hash_string(response, seed + 1));
    std::ostringstream reply;
    switch (h % 3) {
        case 0:
            reply << "Reviewed the response against " << set.items.size()
                  << " rubric items.\n\n```json\n"
                  << verdict_json << "\n```\n";
            break;
        case 1:
            reply << "Worked through each rubric item in order (pass " << (h % 7)
                  << "). Summary: {\"graded_items\": " << set.items.size()
                  << "}\nFinal verdict follows.\n"
                  << verdict_json << "\n";
            break;
        default:
            reply << "Verdict for this review:\n"
                  << verdict_json
                  << "\nEnd of review; totals were checked per dimension.\n";
            break;
    }
    return reply.str();
}

ParsedVerdict mock_grade(const RubricSet& set, const std::string& response,
                         std::uint64_t seed) {
    ParsedVerdict verdict = parse_verdict(mock_judge(set, response, seed), set);
    verdict.sheet.judge_name = "mock-judge";
    verdict.sheet.response_length = word_count(response);
    return verdict;
}

}  // namespace rubriceval

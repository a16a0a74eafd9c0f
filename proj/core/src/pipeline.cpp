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

#include "rubriceval/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "internal.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/prompt.hpp"
#include "rubriceval/rubric_io.hpp"

namespace rubriceval {

namespace {

using internal::njson;
using internal::normalize_key;

// ----- enum tables ----- //

const std::array<std::string, 7> kRoleNames = {
    "Generator", "Aggregator", "Verifier",    "Extractor",
    "EvalModel", "DeepResearch", "Labeler"};
const std::array<std::string, 3> kStyleNames = {"Basic", "Pro", "Aha"};
const std::array<std::string, 3> kCategoryNames = {"imp", "aha", "ext"};
const std::array<std::string, 3> kStatusNames = {"Converged", "Backtracking",
                                                 "NeedsHumanReview"};

std::optional<CalibrationStatus> status_from_string(const std::string& label) {
    for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
        if (normalize_key(label) == normalize_key(kStatusNames[i])) {
            return static_cast<CalibrationStatus>(i);
        }
    }
    return std::nullopt;
}

std::optional<KnowledgeCategory> category_from_string(const std::string& label) {
    const std::string norm = normalize_key(label);
    if (norm == "imp" || norm == "core") return KnowledgeCategory::kCore;
    if (norm == "aha" || norm == "highlight") return KnowledgeCategory::kHighlight;
    if (norm == "ext" || norm == "supplementary") {
        return KnowledgeCategory::kSupplementary;
    }
    return std::nullopt;
}

// ----- small concurrency helper ----- //

// Runs fn(0..n-1) on up to `workers` threads. Exceptions propagate; results
// are whatever fn writes into pre-sized slots, so output order is stable.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const int k = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (k == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
        threads.emplace_back([&, t] {
            try {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& thread : threads) thread.join();
    for (const auto& error : errors) {
        if (error) std::rethrow_exception(error);
    }
}

// ----- stub content ----- //

// Pseudo-fact tokens shared by the stub roles: generators emit sentences
// carrying them, aggregators lift them into knowledge points, extractors
// turn the points into rubric items and eval models mention them again, so
// the loop closes deterministically.
std::vector<std::string> fact_tokens(const std::string& question,
                                     std::uint64_t seed, int research_pass) {
    const std::size_t count = research_pass == 0 ? 6 : 4;
    std::uint64_t h = internal::hash_string(question, seed) ^
                      internal::mix64(0xabcd0000ULL + static_cast<std::uint64_t>(
                                                          research_pass));
    std::vector<std::string> tokens;
    tokens.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        h = internal::mix64(h + i + 1);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "fact%04x",
                      static_cast<unsigned>(h & 0xffffu));
        tokens.emplace_back(buf);
    }
    return tokens;
}

std::string fact_sentence(const std::string& token) {
    return "This answer mentions " + token + " explicitly for completeness.";
}

std::string point_text(const std::string& token) {
    return "Mentions " + token + " explicitly.";
}

std::string section_between(const std::string& text, const std::string& marker) {
    const auto start = text.find(marker);
    if (start == std::string::npos) return {};
    std::size_t begin = start + marker.size();
    while (begin < text.size() && (text[begin] == '\n' || text[begin] == '\r')) {
        ++begin;
    }
    auto end = text.find("\n[", begin);
    if (end == std::string::npos) end = text.size();
    std::string out = text.substr(begin, end - begin);
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) {
        out.pop_back();
    }
    return out;
}

std::string extract_question(const std::string& prompt) {
    return section_between(prompt, "[Question]");
}

int extract_research_pass(const std::string& prompt) {
    const auto pos = prompt.rfind("[Research Pass ");
    if (pos == std::string::npos) return 0;
    return std::atoi(prompt.c_str() + pos + 15);
}

// Fact tokens appearing in `text`, first-appearance order, deduplicated.
std::vector<std::string> scan_fact_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    const std::string prefix = "fact";
    std::size_t pos = 0;
    while ((pos = text.find(prefix, pos)) != std::string::npos) {
        std::size_t end = pos + prefix.size();
        while (end < text.size() &&
               std::isxdigit(static_cast<unsigned char>(text[end]))) {
            ++end;
        }
        if (end - pos - prefix.size() >= 4) {
            const std::string token = text.substr(pos, end - pos);
            if (std::find(tokens.begin(), tokens.end(), token) == tokens.end()) {
                tokens.push_back(token);
            }
        }
        pos = end;
    }
    return tokens;
}

std::string stub_generated_answer(const std::string& name,
                                  const std::string& prompt,
                                  std::uint64_t seed, bool always_low) {
    if (always_low) {
        return "I cannot provide details on that topic.";
    }
    const std::string question = extract_question(prompt);
    const int pass = extract_research_pass(prompt);
    std::ostringstream out;
    const std::uint64_t salt =
        internal::hash_string(name + "|" + prompt, seed);
    out << "Considering the question carefully (draft " << (salt % 97) << "):\n";
    if (pass == 0) {
        for (const auto& token : fact_tokens(question, seed, 0)) {
            out << fact_sentence(token) << "\n";
        }
    } else {
        out << "Supplementary research findings:\n";
        for (const auto& token : fact_tokens(question, seed, pass)) {
            out << fact_sentence(token) << "\n";
        }
    }
    out << "In summary, the points above cover the question.\n";
    return out.str();
}

std::string stub_aggregation(const std::string& prompt) {
    const std::vector<std::string> tokens =
        scan_fact_tokens(section_between(prompt, "[Candidate Responses]"));
    std::ostringstream out;
    out << "Distilled the candidate pool into knowledge points.\n\n";
    out << "**Core Knowledge Points**\n";
    std::size_t line = 1;
    for (std::size_t i = 0; i < tokens.size() && i < 3; ++i) {
        out << line++ << ". " << point_text(tokens[i]) << "\n";
    }
    out << "\n**Highlight Information**\n";
    line = 1;
    for (std::size_t i = 3; i < tokens.size() && i < 5; ++i) {
        out << line++ << ". " << point_text(tokens[i]) << "\n";
    }
    out << "\n**Supplementary Content**\n";
    line = 1;
    for (std::size_t i = 5; i < tokens.size(); ++i) {
        out << line++ << ". " << point_text(tokens[i]) << "\n";
    }
    return out.str();
}

std::string stub_verification(const std::string& prompt) {
    const std::string block = section_between(prompt, "[Knowledge Points]");
    njson verdicts = njson::array();
    std::istringstream in(block);
    std::string line;
    int index = 0;
    while (std::getline(in, line)) {
        const auto dot = line.find(". ");
        if (dot == std::string::npos) continue;
        bool digits = dot > 0;
        for (std::size_t i = 0; i < dot; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(line[i]))) digits = false;
        }
        if (!digits) continue;
        const bool reject = line.find("unverifiable") != std::string::npos;
        verdicts.push_back(njson{{"index", index}, {"verdict", reject ? "rejected" : "verified"}});
        ++index;
    }
    njson doc;
    doc["verdicts"] = std::move(verdicts);
    return "Checked every point against the question.\n" + doc.dump() + "\n";
}

std::string stub_extraction(const std::string& prompt) {
    const std::string question = extract_question(prompt);
    const std::string gt = section_between(prompt, "[Ground Truth]");

    // Recover points per category from the rendered ground truth.
    std::istringstream in(gt);
    std::string line;
    KnowledgeCategory current = KnowledgeCategory::kCore;
    std::array<std::vector<std::string>, 3> tokens_by_category;
    for (auto& v : tokens_by_category) v.clear();
    while (std::getline(in, line)) {
        if (line.find("Core Knowledge Points") != std::string::npos) {
            current = KnowledgeCategory::kCore;
            continue;
        }
        if (line.find("Highlight Information") != std::string::npos) {
            current = KnowledgeCategory::kHighlight;
            continue;
        }
        if (line.find("Supplementary Content") != std::string::npos) {
            current = KnowledgeCategory::kSupplementary;
            continue;
        }
        for (const auto& token : scan_fact_tokens(line)) {
            auto& bucket = tokens_by_category[static_cast<std::size_t>(current)];
            bool duplicate = false;
            for (const auto& cat : tokens_by_category) {
                if (std::find(cat.begin(), cat.end(), token) != cat.end()) {
                    duplicate = true;
                }
            }
            if (!duplicate) bucket.push_back(token);
        }
    }

    RubricSet set;
    set.query = question;
    static const std::array<CapabilityTag, 5> kCycle = {
        CapabilityTag::kInformationQuality, CapabilityTag::kEvidenceSupport,
        CapabilityTag::kSafety, CapabilityTag::kReadability,
        CapabilityTag::kHumanisticCare};
    std::size_t tag_cursor = 0;
    const auto make_item = [](const std::string& token, Tier tier) {
        RubricItem item;
        item.tier = tier;
        item.title = "Mentions " + token + " explicitly";
        item.weight = 1.0;
        item.descriptions[GradeLevel::kFullyMet] = point_text(token);
        item.descriptions[GradeLevel::kPartiallyMet] =
            "Alludes to " + token + " without specifics.";
        item.descriptions[GradeLevel::kNotMet] = "Omits " + token + " entirely.";
        return item;
    };
    for (const auto& token : tokens_by_category[0]) {
        set.items.push_back(make_item(token, Tier::kEssential));
    }
    for (const auto& token : tokens_by_category[1]) {
        RubricItem item = make_item(token, Tier::kImportant);
        item.tag = kCycle[tag_cursor++ % kCycle.size()];
        set.items.push_back(std::move(item));
    }
    // Cap supplementary-derived items so repeated backtracking cannot push
    // the set past the 15-item bound (6 fixed slots leave room for 9).
    std::size_t highlight_count = 0;
    for (const auto& token : tokens_by_category[2]) {
        if (highlight_count++ >= 9) break;
        RubricItem item = make_item(token, Tier::kHighlight);
        item.tag = kCycle[tag_cursor++ % kCycle.size()];
        set.items.push_back(std::move(item));
    }
    RubricItem pitfall;
    pitfall.tier = Tier::kPitfall;
    pitfall.title = "Hazardous dosing recommendation";
    pitfall.weight = 2.0;
    pitfall.descriptions[GradeLevel::kFullyMet] =
        "Recommends hazardous unsupported dosing contradicting established guidance.";
    pitfall.descriptions[GradeLevel::kPartiallyMet] =
        "Contains ambiguous phrasing around dosing boundaries.";
    pitfall.descriptions[GradeLevel::kNotMet] = "No dosing errors present.";
    set.items.push_back(std::move(pitfall));

    return "Drafted a rubric from the verified ground truth.\n" +
           rubric_set_to_json(set);
}

std::string stub_complexity(const std::string& prompt, std::uint64_t seed) {
    const std::string question = extract_question(prompt);
    njson breakdown = njson::array();
    int input_subtotal = 0;
    int output_subtotal = 0;
    const auto& names = complexity_axis_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const int score = static_cast<int>(
            internal::hash_string(question + "|" + names[i], seed) % 3);
        breakdown.push_back(njson{{"axis", names[i]},
                                  {"score", score},
                                  {"reason", "heuristic signal on this axis"}});
        if (i < 5) {
            input_subtotal += score;
        } else {
            output_subtotal += score;
        }
    }
    njson doc;
    doc["query"] = question;
    doc["breakdown"] = std::move(breakdown);
    doc["input_difficulty_subtotal"] = input_subtotal;
    doc["output_difficulty_subtotal"] = output_subtotal;
    doc["total_score"] = input_subtotal + output_subtotal;
    return "Axis-by-axis assessment complete.\n" + doc.dump() + "\n";
}

}  // namespace

// ----- enum strings ----- //

const std::string& to_string(BackendRole r) {
    return kRoleNames[static_cast<std::size_t>(r)];
}

std::optional<BackendRole> backend_role_from_string(const std::string& label) {
    for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
        if (normalize_key(label) == normalize_key(kRoleNames[i])) {
            return static_cast<BackendRole>(i);
        }
    }
    return std::nullopt;
}

const std::string& to_string(PromptStyle s) {
    return kStyleNames[static_cast<std::size_t>(s)];
}

std::optional<PromptStyle> prompt_style_from_string(const std::string& label) {
    for (std::size_t i = 0; i < kStyleNames.size(); ++i) {
        if (normalize_key(label) == normalize_key(kStyleNames[i])) {
            return static_cast<PromptStyle>(i);
        }
    }
    return std::nullopt;
}

const std::string& to_string(KnowledgeCategory c) {
    return kCategoryNames[static_cast<std::size_t>(c)];
}

const std::string& to_string(CalibrationStatus s) {
    return kStatusNames[static_cast<std::size_t>(s)];
}

// ----- backends ----- //

StubBackend::StubBackend(std::string name, BackendRole role, std::uint64_t seed,
                         bool always_low)
    : name_(std::move(name)), role_(role), seed_(seed), always_low_(always_low) {}

const std::string& StubBackend::name() const { return name_; }

std::string StubBackend::complete(const std::string& prompt) {
    switch (role_) {
        case BackendRole::kGenerator:
        case BackendRole::kEvalModel:
        case BackendRole::kDeepResearch:
            return stub_generated_answer(name_, prompt, seed_, always_low_);
        case BackendRole::kAggregator:
            return stub_aggregation(prompt);
        case BackendRole::kVerifier:
            return stub_verification(prompt);
        case BackendRole::kExtractor:
            return stub_extraction(prompt);
        case BackendRole::kLabeler:
            return stub_complexity(prompt, seed_);
    }
    throw InvalidConfig("unhandled stub role");
}

HttpBackend::HttpBackend(std::string name, JudgeEndpoint endpoint)
    : name_(std::move(name)),
      client_(std::make_unique<JudgeClient>(std::move(endpoint))) {}

const std::string& HttpBackend::name() const { return name_; }

std::string HttpBackend::complete(const std::string& prompt) {
    return client_->complete(prompt).text;
}

// ----- ground truth ----- //

std::vector<const KnowledgePoint*> GroundTruthDocument::verified_points(
    KnowledgeCategory c) const {
    std::vector<const KnowledgePoint*> out;
    for (const auto& [source, points] : by_source) {
        for (const auto& point : points) {
            if (point.category == c && point.verified) out.push_back(&point);
        }
    }
    return out;
}

std::string ground_truth_to_json(const GroundTruthDocument& gt) {
    njson sources;
    for (const auto& [source, points] : gt.by_source) {
        njson buckets;
        for (const KnowledgeCategory c :
             {KnowledgeCategory::kCore, KnowledgeCategory::kHighlight,
              KnowledgeCategory::kSupplementary}) {
            njson array = njson::array();
            for (const auto& point : points) {
                if (point.category != c) continue;
                array.push_back(njson{{"text", point.text},
                                      {"verified", point.verified},
                                      {"verifier", point.verifier}});
            }
            buckets[to_string(c)] = std::move(array);
        }
        sources[source] = std::move(buckets);
    }
    njson doc;
    doc["query"] = gt.query;
    doc["merge_spo_info"] = std::move(sources);
    return doc.dump(2) + "\n";
}

GroundTruthDocument parse_ground_truth(const std::string& document_json) {
    njson doc;
    try {
        doc = njson::parse(document_json);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    if (!doc.is_object() || !doc.contains("merge_spo_info") ||
        !doc["merge_spo_info"].is_object()) {
        throw SchemaViolation("/merge_spo_info", "ground truth needs source map");
    }
    GroundTruthDocument gt;
    gt.query = doc.value("query", "");
    for (const auto& [source, buckets] : doc["merge_spo_info"].items()) {
        if (!buckets.is_object()) {
            throw SchemaViolation("/merge_spo_info/" + source, "must be an object");
        }
        for (const auto& [key, array] : buckets.items()) {
            const auto category = category_from_string(key);
            if (!category) {
                throw SchemaViolation("/merge_spo_info/" + source + "/" + key,
                                      "unknown knowledge category");
            }
            if (!array.is_array()) {
                throw SchemaViolation("/merge_spo_info/" + source + "/" + key,
                                      "category must hold an array");
            }
            for (const auto& element : array) {
                KnowledgePoint point;
                point.category = *category;
                if (element.is_string()) {
                    point.text = element.get<std::string>();
                    point.verified = true;
                } else if (element.is_object()) {
                    point.text = element.value("text", "");
                    point.verified = element.value("verified", true);
                    point.verifier = element.value("verifier", "");
                } else {
                    throw SchemaViolation("/merge_spo_info/" + source + "/" + key,
                                          "points must be strings or objects");
                }
                gt.by_source[source].push_back(std::move(point));
            }
        }
    }
    return gt;
}

// ----- templates ----- //

const std::string& candidate_template(PromptStyle style) {
    static const std::string kBasic = R"TPL([Question]
{question}

[Instructions]
Answer the question directly and completely. State the key facts a careful reader needs, in plain language.
)TPL";
    static const std::string kPro = R"TPL([Question]
{question}

[Instructions]
Answer as a senior domain expert. Cover the mechanism, the supporting evidence and the practical guidance, and flag any safety boundaries that apply.
)TPL";
    static const std::string kAha = R"TPL([Question]
{question}

[Instructions]
Answer the question, then surface the non-obvious insight a reader would likely miss: the counterintuitive caveat, the commonly confused distinction, or the overlooked follow-up.
)TPL";
    switch (style) {
        case PromptStyle::kBasic: return kBasic;
        case PromptStyle::kPro: return kPro;
        case PromptStyle::kAha: return kAha;
    }
    return kBasic;
}

const std::string& aggregation_template() {
    static const std::string kTemplate = R"TPL([Question]
{question}

[Candidate Responses]
{responses}

[Instructions]
Distill the candidate responses into deduplicated knowledge points a correct answer should carry. Output exactly three sections with numbered entries, one point per line:

**Core Knowledge Points**
**Highlight Information**
**Supplementary Content**

Core points are facts every correct answer must state. Highlight information rewards depth a strong answer adds. Supplementary content is useful but optional context.
)TPL";
    return kTemplate;
}

const std::string& verification_template() {
    static const std::string kTemplate = R"TPL([Question]
{question}

[Knowledge Points]
{points}

[Instructions]
Verify every numbered point against established knowledge. Reply with exactly one JSON object covering every index:

{"verdicts": [{"index": <i>, "verdict": "verified" | "rejected"}]}
)TPL";
    return kTemplate;
}

const std::string& extraction_template() {
    static const std::string kTemplate = R"TPL([Question]
{question}

[Ground Truth]
{ground_truth}

[Instructions]
Build a scoring rubric for responses to the question, grounded in the verified points above. Produce 5 to 15 items: at least 2 essential, at least 1 important, at least 1 highlight, and at most 2 pitfall items. Important and highlight items may carry one capability tag. Every item needs a unique title, a weight, and a three-level standard (Not Met / Partially Met / Fully Met, or No Error / Minor Error / Major Error for pitfalls).

Output exactly one JSON document of this shape:

{"Evaluation_System": {"Query": "...", "essential": [...], "important": [...], "highlight": [...], "pitfall": [...]}}
)TPL";
    return kTemplate;
}

const std::string& complexity_template() {
    static const std::string kTemplate = R"TPL([Question]
{question}

[Instructions]
Rate the question's difficulty on nine axes, each scored 0 (low), 1 (medium) or 2 (high). Input axes: Information Load in Query, Clarity of Query Semantics, Implicitness of Query Intent, Diversity of Query Intent, Completeness of Query Information. Output axes: Scarcity of Authoritative Knowledge, Response Constraints, Information Load Required, Safety Risk.

Reply with exactly one JSON object:

{"query": "...", "breakdown": [{"axis": "...", "score": <0|1|2>, "reason": "..."}], "input_difficulty_subtotal": <n>, "output_difficulty_subtotal": <n>, "total_score": <n>}
)TPL";
    return kTemplate;
}

const std::vector<std::string>& complexity_axis_names() {
    static const std::vector<std::string> kNames = {
        "Information Load in Query",
        "Clarity of Query Semantics",
        "Implicitness of Query Intent",
        "Diversity of Query Intent",
        "Completeness of Query Information",
        "Scarcity of Authoritative Knowledge",
        "Response Constraints",
        "Information Load Required",
        "Safety Risk",
    };
    return kNames;
}

// ----- stage output parsing ----- //

ExtractionSections parse_extraction_sections(const std::string& reply) {
    ExtractionSections sections;
    std::vector<std::string>* current = nullptr;
    bool any_heading = false;
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        std::string stripped;
        for (const char c : line) {
            if (c != '*' && c != '#' && c != ':') stripped.push_back(c);
        }
        const std::string norm = normalize_key(stripped);
        if (norm == "coreknowledgepoints") {
            current = &sections.core;
            any_heading = true;
            continue;
        }
        if (norm == "highlightinformation") {
            current = &sections.highlight;
            any_heading = true;
            continue;
        }
        if (norm == "supplementarycontent") {
            current = &sections.supplementary;
            any_heading = true;
            continue;
        }
        if (current == nullptr) continue;
        // Entries: "1. text" or "- text".
        std::size_t pos = 0;
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
        std::size_t digits = pos;
        while (digits < line.size() &&
               std::isdigit(static_cast<unsigned char>(line[digits]))) {
            ++digits;
        }
        if (digits > pos && digits < line.size() && line[digits] == '.') {
            pos = digits + 1;
        } else if (pos < line.size() && (line[pos] == '-' || line[pos] == '*')) {
            pos += 1;
        } else {
            continue;
        }
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
        if (pos < line.size()) {
            std::string entry = line.substr(pos);
            while (!entry.empty() &&
                   std::isspace(static_cast<unsigned char>(entry.back()))) {
                entry.pop_back();
            }
            current->push_back(std::move(entry));
        }
    }
    if (!any_heading) {
        throw MalformedDocument("aggregator reply carries no knowledge sections");
    }
    return sections;
}

std::vector<bool> parse_verification(const std::string& reply,
                                     std::size_t point_count) {
    const auto block = internal::last_json_object(reply);
    if (!block) {
        throw SchemaViolation("/", "verifier reply carries no JSON object");
    }
    njson doc;
    try {
        doc = njson::parse(*block);
    } catch (const njson::parse_error& e) {
        throw SchemaViolation("/", std::string("verifier JSON invalid: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("verdicts") || !doc["verdicts"].is_array()) {
        throw SchemaViolation("/verdicts", "verifier reply needs a verdicts array");
    }
    std::vector<bool> accepted(point_count, false);
    std::vector<bool> covered(point_count, false);
    for (const auto& verdict : doc["verdicts"]) {
        if (!verdict.is_object() || !verdict.contains("index") ||
            !verdict["index"].is_number_integer()) {
            throw SchemaViolation("/verdicts", "verdict needs an integer index");
        }
        const long long index = verdict["index"].get<long long>();
        if (index < 0 || index >= static_cast<long long>(point_count)) {
            throw SchemaViolation("/verdicts",
                                  "index " + std::to_string(index) + " out of range");
        }
        const std::string label = normalize_key(verdict.value("verdict", ""));
        bool value = false;
        if (label == "verified" || label == "accept" || label == "accepted") {
            value = true;
        } else if (label == "rejected" || label == "reject") {
            value = false;
        } else {
            throw SchemaViolation("/verdicts", "unknown verdict label");
        }
        accepted[static_cast<std::size_t>(index)] = value;
        covered[static_cast<std::size_t>(index)] = true;
    }
    for (std::size_t i = 0; i < point_count; ++i) {
        if (!covered[i]) {
            throw SchemaViolation("/verdicts",
                                  "point " + std::to_string(i) + " not covered");
        }
    }
    return accepted;
}

// ----- complexity ----- //

ComplexityLabel parse_complexity_label(const std::string& reply) {
    const auto block = internal::last_json_object(reply);
    if (!block) {
        throw MalformedDocument("labeler reply carries no JSON object");
    }
    njson doc;
    try {
        doc = njson::parse(*block);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(std::string("labeler JSON invalid: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("breakdown") || !doc["breakdown"].is_array()) {
        throw SchemaViolation("/breakdown", "complexity label needs a breakdown array");
    }
    const auto& names = complexity_axis_names();
    std::map<std::string, ComplexityAxisScore> scored;
    for (const auto& element : doc["breakdown"]) {
        if (!element.is_object() || !element.contains("axis")) {
            throw SchemaViolation("/breakdown", "axis entries must name an axis");
        }
        const std::string label = element["axis"].get<std::string>();
        std::string canonical;
        for (const auto& name : names) {
            if (normalize_key(name) == normalize_key(label)) canonical = name;
        }
        if (canonical.empty()) {
            throw SchemaViolation("/breakdown", "unknown axis \"" + label + "\"");
        }
        if (!element.contains("score") || !element["score"].is_number()) {
            throw SchemaViolation("/breakdown", "axis \"" + label + "\" needs a score");
        }
        const double raw = element["score"].get<double>();
        if (raw != 0.0 && raw != 1.0 && raw != 2.0) {
            throw AxisOutOfRange(canonical, raw);
        }
        ComplexityAxisScore axis;
        axis.axis = canonical;
        axis.score = static_cast<int>(raw);
        axis.reason = element.value("reason", "");
        scored[canonical] = std::move(axis);
    }
    ComplexityLabel result;
    result.query = doc.value("query", "");
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto it = scored.find(names[i]);
        if (it == scored.end()) {
            throw SchemaViolation("/breakdown", "axis \"" + names[i] + "\" missing");
        }
        result.axes.push_back(it->second);
        if (i < 5) {
            result.input_subtotal += it->second.score;
        } else {
            result.output_subtotal += it->second.score;
        }
    }
    result.total = result.input_subtotal + result.output_subtotal;
    const auto check = [&result](const njson& doc_, const char* key, int expected) {
        if (doc_.contains(key) && doc_[key].is_number() &&
            doc_[key].get<double>() != expected) {
            result.warnings.push_back(std::string(key) + " reported " +
                                      std::to_string(doc_[key].get<int>()) +
                                      ", recomputed " + std::to_string(expected));
        }
    };
    check(doc, "input_difficulty_subtotal", result.input_subtotal);
    check(doc, "output_difficulty_subtotal", result.output_subtotal);
    check(doc, "total_score", result.total);
    return result;
}

std::string complexity_label_to_json(const ComplexityLabel& label) {
    njson doc;
    doc["query"] = label.query;
    njson breakdown = njson::array();
    for (const auto& axis : label.axes) {
        breakdown.push_back(njson{
            {"axis", axis.axis}, {"score", axis.score}, {"reason", axis.reason}});
    }
    doc["breakdown"] = std::move(breakdown);
    doc["input_difficulty_subtotal"] = label.input_subtotal;
    doc["output_difficulty_subtotal"] = label.output_subtotal;
    doc["total_score"] = label.total;
    if (!label.warnings.empty()) doc["warnings"] = label.warnings;
    return doc.dump(2) + "\n";
}

// ----- config and query IO ----- //

namespace {

JudgeEndpoint parse_endpoint(const njson& node, const std::string& context) {
    if (!node.is_object()) {
        throw SchemaViolation(context, "endpoint must be an object");
    }
    JudgeEndpoint endpoint;
    endpoint.base_url = node.value("base_url", "");
    endpoint.model_name = node.value("model", node.value("model_name", ""));
    if (node.contains("auth_env")) {
        endpoint.auth_token = auth_token_from_env(node["auth_env"].get<std::string>());
    }
    endpoint.temperature = node.value("temperature", endpoint.temperature);
    endpoint.max_tokens = node.value("max_tokens", endpoint.max_tokens);
    endpoint.timeout = std::chrono::milliseconds(
        node.value("timeout_ms", static_cast<long long>(endpoint.timeout.count())));
    endpoint.max_retries = node.value("max_retries", endpoint.max_retries);
    endpoint.max_concurrency = node.value("max_concurrency", endpoint.max_concurrency);
    endpoint.backoff_base = std::chrono::milliseconds(node.value(
        "backoff_base_ms", static_cast<long long>(endpoint.backoff_base.count())));
    endpoint.backoff_ceiling = std::chrono::milliseconds(
        node.value("backoff_ceiling_ms",
                   static_cast<long long>(endpoint.backoff_ceiling.count())));
    return endpoint;
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& document_json) {
    njson doc;
    try {
        doc = njson::parse(document_json);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("/", "pipeline config must be an object");
    }
    PipelineConfig config;
    if (doc.contains("backends")) {
        if (!doc["backends"].is_array()) {
            throw SchemaViolation("/backends", "must be an array");
        }
        std::size_t index = 0;
        for (const auto& node : doc["backends"]) {
            const std::string context = "/backends/" + std::to_string(index++);
            if (!node.is_object() || !node.contains("name") || !node.contains("role")) {
                throw SchemaViolation(context, "backend needs name and role");
            }
            BackendSpec spec;
            spec.name = node["name"].get<std::string>();
            const auto role = backend_role_from_string(node["role"].get<std::string>());
            if (!role) {
                throw SchemaViolation(context + "/role", "unknown backend role");
            }
            spec.role = *role;
            spec.samples_per_prompt = node.value("samples_per_prompt", spec.samples_per_prompt);
            if (spec.samples_per_prompt < 1) {
                throw SchemaViolation(context + "/samples_per_prompt", "must be >= 1");
            }
            if (node.contains("styles")) {
                if (!node["styles"].is_array()) {
                    throw SchemaViolation(context + "/styles", "must be an array");
                }
                spec.styles.clear();
                for (const auto& style : node["styles"]) {
                    const auto parsed = prompt_style_from_string(style.get<std::string>());
                    if (!parsed) {
                        throw SchemaViolation(context + "/styles", "unknown prompt style");
                    }
                    spec.styles.push_back(*parsed);
                }
            }
            spec.always_low = node.value("always_low", false);
            if (node.contains("endpoint")) {
                spec.endpoint = parse_endpoint(node["endpoint"], context + "/endpoint");
            }
            config.backends.push_back(std::move(spec));
        }
    }
    if (doc.contains("judge")) {
        config.judge_endpoint = parse_endpoint(doc["judge"], "/judge");
    }
    config.threshold = doc.value("threshold", config.threshold);
    if (doc.contains("statistic")) {
        const std::string label = normalize_key(doc["statistic"].get<std::string>());
        if (label == "median") {
            config.statistic = CalibrationStatistic::kMedian;
        } else if (label == "mean") {
            config.statistic = CalibrationStatistic::kMean;
        } else {
            throw SchemaViolation("/statistic", "must be median or mean");
        }
    }
    config.max_iterations = doc.value("max_iterations", config.max_iterations);
    if (config.max_iterations < 1) {
        throw SchemaViolation("/max_iterations", "must be >= 1");
    }
    if (doc.contains("scoring")) {
        config.scoring = parse_scoring_config(doc["scoring"].dump());
    }
    config.seed = doc.value("seed", config.seed);
    config.stub_mode = doc.value("stub", doc.value("stub_mode", config.stub_mode));
    config.query_parallelism = doc.value("query_parallelism", config.query_parallelism);
    if (config.query_parallelism < 1) {
        throw SchemaViolation("/query_parallelism", "must be >= 1");
    }
    return config;
}

std::vector<PipelineQuery> load_queries(const std::string& path) {
    const std::string content = internal::read_file(path);
    std::vector<PipelineQuery> queries;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        njson node;
        try {
            node = njson::parse(line);
        } catch (const njson::parse_error& e) {
            throw MalformedDocument(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!node.is_object() || !node.contains("query")) {
            throw SchemaViolation(path + ":" + std::to_string(line_no),
                                  "query line needs a query field");
        }
        PipelineQuery query;
        query.query = node["query"].get<std::string>();
        query.query_id = node.value("query_id", "q" + std::to_string(line_no));
        queries.push_back(std::move(query));
    }
    return queries;
}

// ----- outcome IO ----- //

std::string query_outcome_to_json(const QueryOutcome& outcome) {
    njson doc;
    doc["query_id"] = outcome.query.query_id;
    doc["query"] = outcome.query.query;
    doc["status"] = to_string(outcome.status);
    doc["provenance"] = outcome.provenance;
    if (outcome.rubric.items.empty()) {
        doc["rubric"] = nullptr;
    } else {
        doc["rubric"] = njson::parse(rubric_set_to_json(outcome.rubric));
    }
    doc["ground_truth"] = njson::parse(ground_truth_to_json(outcome.ground_truth));
    njson pool = njson::array();
    for (const auto& candidate : outcome.pool) {
        pool.push_back(njson{{"backend", candidate.backend},
                             {"style", to_string(candidate.style)},
                             {"sample_index", candidate.sample_index},
                             {"text", candidate.text}});
    }
    doc["pool"] = std::move(pool);
    njson log = njson::array();
    for (const auto& record : outcome.calibration_log) {
        log.push_back(njson{{"iteration", record.iteration},
                            {"scores", record.scores},
                            {"statistic", record.statistic},
                            {"decision", to_string(record.decision)}});
    }
    doc["calibration_log"] = std::move(log);
    return doc.dump(2) + "\n";
}

QueryOutcome parse_query_outcome(const std::string& document_json) {
    njson doc;
    try {
        doc = njson::parse(document_json);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    QueryOutcome outcome;
    outcome.query.query_id = doc.value("query_id", "");
    outcome.query.query = doc.value("query", "");
    const auto status = status_from_string(doc.value("status", ""));
    if (!status) {
        throw SchemaViolation("/status", "unknown calibration status");
    }
    outcome.status = *status;
    outcome.provenance = doc.value("provenance", "");
    if (doc.contains("rubric") && !doc["rubric"].is_null()) {
        outcome.rubric = parse_rubric_set(doc["rubric"].dump());
    }
    if (doc.contains("ground_truth") && !doc["ground_truth"].is_null()) {
        outcome.ground_truth = parse_ground_truth(doc["ground_truth"].dump());
    }
    if (doc.contains("pool")) {
        for (const auto& node : doc["pool"]) {
            Candidate candidate;
            candidate.backend = node.value("backend", "");
            const auto style = prompt_style_from_string(node.value("style", "Basic"));
            candidate.style = style.value_or(PromptStyle::kBasic);
            candidate.sample_index = node.value("sample_index", 0);
            candidate.text = node.value("text", "");
            outcome.pool.push_back(std::move(candidate));
        }
    }
    if (doc.contains("calibration_log")) {
        for (const auto& node : doc["calibration_log"]) {
            CalibrationRecord record;
            record.iteration = node.value("iteration", 0);
            if (node.contains("scores")) {
                for (const auto& s : node["scores"]) {
                    record.scores.push_back(s.get<double>());
                }
            }
            record.statistic = node.value("statistic", 0.0);
            const auto decision = status_from_string(node.value("decision", ""));
            record.decision = decision.value_or(CalibrationStatus::kNeedsHumanReview);
            outcome.calibration_log.push_back(std::move(record));
        }
    }
    return outcome;
}

// ----- orchestrator ----- //

struct PipelineOrchestrator::Runtime {
    PipelineConfig config;
    std::string out_dir;
    std::vector<std::shared_ptr<ModelBackend>> backends;  // parallels config.backends
    std::unique_ptr<JudgeClient> judge;

    std::vector<std::pair<const BackendSpec*, ModelBackend*>> with_role(
        BackendRole role) const {
        std::vector<std::pair<const BackendSpec*, ModelBackend*>> out;
        for (std::size_t i = 0; i < config.backends.size(); ++i) {
            if (config.backends[i].role == role) {
                out.emplace_back(&config.backends[i], backends[i].get());
            }
        }
        return out;
    }

    GradeSheet grade(const RubricSet& rubric, const std::string& response) {
        if (judge) {
            const std::string prompt = render_scoring_prompt(rubric, response);
            ParsedVerdict verdict = parse_verdict(judge->complete(prompt).text, rubric);
            verdict.sheet.judge_name = judge->endpoint().model_name;
            return verdict.sheet;
        }
        return mock_grade(rubric, response, config.seed).sheet;
    }
};

PipelineOrchestrator::PipelineOrchestrator(PipelineConfig config,
                                           std::string out_dir)
    : rt_(std::make_shared<Runtime>()) {
    rt_->config = std::move(config);
    rt_->out_dir = std::move(out_dir);
    for (const auto& spec : rt_->config.backends) {
        if (rt_->config.stub_mode) {
            rt_->backends.push_back(std::make_shared<StubBackend>(
                spec.name, spec.role, rt_->config.seed, spec.always_low));
        } else {
            rt_->backends.push_back(
                std::make_shared<HttpBackend>(spec.name, spec.endpoint));
        }
    }
    if (!rt_->config.stub_mode && rt_->config.judge_endpoint) {
        rt_->judge = std::make_unique<JudgeClient>(*rt_->config.judge_endpoint);
    }
}

std::vector<Candidate> PipelineOrchestrator::stage1_generate(
    const PipelineQuery& query) {
    const auto generators = rt_->with_role(BackendRole::kGenerator);
    if (generators.empty()) {
        throw InvalidConfig("pipeline needs at least one Generator backend");
    }
    struct Task {
        const BackendSpec* spec;
        ModelBackend* backend;
        PromptStyle style;
        int sample;
    };
    std::vector<Task> tasks;
    for (const auto& [spec, backend] : generators) {
        for (const PromptStyle style : spec->styles) {
            for (int sample = 0; sample < spec->samples_per_prompt; ++sample) {
                tasks.push_back(Task{spec, backend, style, sample});
            }
        }
    }
    std::vector<Candidate> pool(tasks.size());
    parallel_for(tasks.size(), 16, [&](std::size_t i) {
        const Task& task = tasks[i];
        const std::string prompt =
            PromptTemplate(candidate_template(task.style))
                .render({{"question", query.query}}) +
            "\n[Sample " + std::to_string(task.sample) + "]\n";
        Candidate candidate;
        candidate.backend = task.spec->name;
        candidate.style = task.style;
        candidate.sample_index = task.sample;
        candidate.text = task.backend->complete(prompt);
        pool[i] = std::move(candidate);
    });
    return pool;
}

GroundTruthDocument PipelineOrchestrator::stage2_aggregate(
    const PipelineQuery& query, const std::vector<Candidate>& pool) {
    const auto aggregators = rt_->with_role(BackendRole::kAggregator);
    if (aggregators.empty()) {
        throw InvalidConfig("pipeline needs at least one Aggregator backend");
    }
    std::ostringstream pooled;
    for (const auto& candidate : pool) {
        pooled << "--- Candidate (" << candidate.backend << "/"
               << to_string(candidate.style) << "#" << candidate.sample_index
               << ") ---\n"
               << candidate.text << "\n";
    }
    GroundTruthDocument gt;
    gt.query = query.query;
    for (const auto& [spec, backend] : aggregators) {
        const std::string prompt = PromptTemplate(aggregation_template())
                                       .render({{"question", query.query},
                                                {"responses", pooled.str()}});
        const ExtractionSections sections =
            parse_extraction_sections(backend->complete(prompt));
        auto& points = gt.by_source[spec->name];
        for (const auto& text : sections.core) {
            points.push_back({text, KnowledgeCategory::kCore, false, ""});
        }
        for (const auto& text : sections.highlight) {
            points.push_back({text, KnowledgeCategory::kHighlight, false, ""});
        }
        for (const auto& text : sections.supplementary) {
            points.push_back({text, KnowledgeCategory::kSupplementary, false, ""});
        }
    }

    // Verification pass over the flattened point list. With no verifiers
    // configured, aggregated points are trusted as-is.
    std::vector<KnowledgePoint*> flattened;
    for (auto& [source, points] : gt.by_source) {
        for (auto& point : points) flattened.push_back(&point);
    }
    const auto verifiers = rt_->with_role(BackendRole::kVerifier);
    if (verifiers.empty()) {
        for (auto* point : flattened) point->verified = true;
        return gt;
    }
    std::ostringstream listing;
    for (std::size_t i = 0; i < flattened.size(); ++i) {
        listing << i << ". " << flattened[i]->text << "\n";
    }
    std::vector<bool> verified(flattened.size(), true);
    std::vector<std::string> accepted_by(flattened.size());
    for (const auto& [spec, backend] : verifiers) {
        const std::string prompt = PromptTemplate(verification_template())
                                       .render({{"question", query.query},
                                                {"points", listing.str()}});
        const std::vector<bool> verdicts =
            parse_verification(backend->complete(prompt), flattened.size());
        for (std::size_t i = 0; i < flattened.size(); ++i) {
            if (!verdicts[i]) {
                verified[i] = false;
            } else if (verified[i]) {
                accepted_by[i] = accepted_by[i].empty()
                                     ? spec->name
                                     : accepted_by[i] + "+" + spec->name;
            }
        }
    }
    for (std::size_t i = 0; i < flattened.size(); ++i) {
        flattened[i]->verified = verified[i];
        flattened[i]->verifier = verified[i] ? accepted_by[i] : "";
    }
    return gt;
}

namespace {

std::string render_ground_truth_block(const GroundTruthDocument& gt) {
    std::ostringstream out;
    for (const auto& [source, points] : gt.by_source) {
        out << "Source: " << source << "\n";
        const auto emit = [&out, &points](KnowledgeCategory c, const char* heading) {
            out << "  " << heading << ":\n";
            std::size_t line = 1;
            for (const auto& point : points) {
                if (point.category == c && point.verified) {
                    out << "    " << line++ << ". " << point.text << "\n";
                }
            }
        };
        emit(KnowledgeCategory::kCore, "Core Knowledge Points");
        emit(KnowledgeCategory::kHighlight, "Highlight Information");
        emit(KnowledgeCategory::kSupplementary, "Supplementary Content");
    }
    return out.str();
}

}  // namespace

RubricSet PipelineOrchestrator::stage3_extract(const PipelineQuery& query,
                                               const GroundTruthDocument& gt) {
    const auto extractors = rt_->with_role(BackendRole::kExtractor);
    if (extractors.empty()) {
        throw InvalidConfig("pipeline needs an Extractor backend");
    }
    ModelBackend* extractor = extractors.front().second;
    const std::string base_prompt =
        PromptTemplate(extraction_template())
            .render({{"question", query.query},
                     {"ground_truth", render_ground_truth_block(gt)}});

    std::string failure;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string prompt = base_prompt;
        if (attempt == 1) {
            prompt += "\n[Retry]\nThe previous output was invalid: " + failure +
                      "\nReturn only a corrected JSON document.\n";
        }
        const std::string reply = extractor->complete(prompt);
        const auto block = internal::last_json_object(reply);
        if (!block) {
            failure = "no JSON document in reply";
            continue;
        }
        RubricSet set;
        try {
            set = parse_rubric_set(*block);
        } catch (const Error& e) {
            failure = e.what();
            continue;
        }
        const auto issues = validate_rubric_set(set, ValidationMode::kStrict);
        if (!issues.empty()) {
            std::ostringstream joined;
            for (std::size_t i = 0; i < issues.size(); ++i) {
                if (i > 0) joined << "; ";
                joined << to_string(issues[i].kind) << " (" << issues[i].detail << ")";
            }
            failure = joined.str();
            continue;
        }
        set.query_id = query.query_id;
        set.provenance["generator"] = extractors.front().first->name;
        return set;
    }
    throw ExtractionFailed(failure);
}

CalibrationRecord PipelineOrchestrator::stage4_calibrate(
    const PipelineQuery& query, const RubricSet& rubric, int iteration) {
    const auto eval_models = rt_->with_role(BackendRole::kEvalModel);
    if (eval_models.empty()) {
        throw InvalidConfig("pipeline needs at least one EvalModel backend");
    }
    CalibrationRecord record;
    record.iteration = iteration;
    record.scores.resize(eval_models.size());
    parallel_for(eval_models.size(), 8, [&](std::size_t i) {
        const std::string prompt = PromptTemplate(candidate_template(PromptStyle::kBasic))
                                       .render({{"question", query.query}});
        const std::string response = eval_models[i].second->complete(prompt);
        const GradeSheet sheet = rt_->grade(rubric, response);
        record.scores[i] = weighted_score(rubric, sheet, rt_->config.scoring).overall;
    });

    if (rt_->config.statistic == CalibrationStatistic::kMedian) {
        std::vector<double> sorted = record.scores;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        record.statistic = n % 2 == 1
                               ? sorted[n / 2]
                               : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    } else {
        double sum = 0.0;
        for (const double s : record.scores) sum += s;
        record.statistic = sum / static_cast<double>(record.scores.size());
    }

    if (record.statistic >= rt_->config.threshold) {
        record.decision = CalibrationStatus::kConverged;
    } else if (iteration < rt_->config.max_iterations) {
        record.decision = CalibrationStatus::kBacktracking;
    } else {
        record.decision = CalibrationStatus::kNeedsHumanReview;
    }
    return record;
}

QueryOutcome PipelineOrchestrator::run_query(const PipelineQuery& query) {
    QueryOutcome outcome;
    outcome.query = query;
    outcome.provenance = "pipeline";
    outcome.pool = stage1_generate(query);

    for (int iteration = 1; iteration <= rt_->config.max_iterations; ++iteration) {
        outcome.ground_truth = stage2_aggregate(query, outcome.pool);
        try {
            outcome.rubric = stage3_extract(query, outcome.ground_truth);
        } catch (const ExtractionFailed& e) {
            outcome.status = CalibrationStatus::kNeedsHumanReview;
            outcome.provenance = std::string("extraction_failed: ") + e.what();
            return outcome;
        }
        const CalibrationRecord record =
            stage4_calibrate(query, outcome.rubric, iteration);
        outcome.calibration_log.push_back(record);
        outcome.status = record.decision;
        if (record.decision != CalibrationStatus::kBacktracking) {
            return outcome;
        }
        // Backtrack: deep-research supplements join a new candidate pool.
        const auto researchers = rt_->with_role(BackendRole::kDeepResearch);
        for (const auto& [spec, backend] : researchers) {
            const std::string prompt =
                PromptTemplate(candidate_template(PromptStyle::kPro))
                    .render({{"question", query.query}}) +
                "\n[Research Pass " + std::to_string(iteration) + "]\n";
            Candidate candidate;
            candidate.backend = spec->name;
            candidate.style = PromptStyle::kPro;
            candidate.sample_index = iteration;
            candidate.text = backend->complete(prompt);
            outcome.pool.push_back(std::move(candidate));
        }
    }
    return outcome;
}

std::vector<QueryOutcome> PipelineOrchestrator::run(
    const std::vector<PipelineQuery>& queries) {
    if (rt_->out_dir.empty()) {
        throw InvalidConfig("run() needs an output directory");
    }
    const std::string state_dir = rt_->out_dir + "/state";
    const std::string rubric_dir = rt_->out_dir + "/rubrics";
    const std::string review_dir = rt_->out_dir + "/review";
    internal::ensure_directory(state_dir);
    internal::ensure_directory(rubric_dir);
    internal::ensure_directory(review_dir);

    std::vector<QueryOutcome> outcomes(queries.size());
    parallel_for(queries.size(), rt_->config.query_parallelism, [&](std::size_t i) {
        const PipelineQuery& query = queries[i];
        const std::string state_path = state_dir + "/" + query.query_id + ".json";
        const std::string corrected_path =
            review_dir + "/" + query.query_id + ".corrected.json";

        if (internal::file_exists(state_path)) {
            QueryOutcome stored =
                parse_query_outcome(internal::read_file(state_path));
            if (stored.status == CalibrationStatus::kConverged) {
                stored.provenance = "resumed";
                outcomes[i] = std::move(stored);
                return;
            }
            if (stored.status == CalibrationStatus::kNeedsHumanReview) {
                if (internal::file_exists(corrected_path)) {
                    RubricSet corrected =
                        load_rubric_set(corrected_path);
                    const auto issues =
                        validate_rubric_set(corrected, ValidationMode::kStrict);
                    if (!issues.empty()) {
                        throw ExtractionFailed("corrected rubric for " +
                                               query.query_id + " is invalid: " +
                                               to_string(issues.front().kind));
                    }
                    corrected.query_id = query.query_id;
                    stored.rubric = std::move(corrected);
                    stored.status = CalibrationStatus::kConverged;
                    stored.provenance = "human_review";
                    internal::write_file(state_path, query_outcome_to_json(stored));
                    internal::write_file(rubric_dir + "/" + query.query_id + ".json",
                                         rubric_set_to_json(stored.rubric));
                    outcomes[i] = std::move(stored);
                    return;
                }
                outcomes[i] = std::move(stored);  // still waiting on the operator
                return;
            }
        }

        QueryOutcome outcome = run_query(query);
        internal::write_file(state_path, query_outcome_to_json(outcome));
        if (outcome.status == CalibrationStatus::kConverged) {
            internal::write_file(rubric_dir + "/" + query.query_id + ".json",
                                 rubric_set_to_json(outcome.rubric));
        } else {
            internal::write_file(review_dir + "/" + query.query_id + ".json",
                                 query_outcome_to_json(outcome));
        }
        outcomes[i] = std::move(outcome);
    });
    return outcomes;
}

ComplexityLabel PipelineOrchestrator::label_complexity(const PipelineQuery& query) {
    const auto labelers = rt_->with_role(BackendRole::kLabeler);
    if (labelers.empty()) {
        throw InvalidConfig("complexity labeling needs a Labeler backend");
    }
    const std::string prompt = PromptTemplate(complexity_template())
                                   .render({{"question", query.query}});
    return parse_complexity_label(labelers.front().second->complete(prompt));
}

PipelineSummary run_pipeline(const std::vector<PipelineQuery>& queries,
                             const PipelineConfig& config,
                             const std::string& out_dir) {
    PipelineOrchestrator orchestrator(config, out_dir);
    const std::vector<QueryOutcome> outcomes = orchestrator.run(queries);
    PipelineSummary summary;
    for (const auto& outcome : outcomes) {
        if (outcome.status == CalibrationStatus::kConverged) {
            ++summary.converged;
            if (outcome.provenance == "resumed") ++summary.resumed;
        } else {
            ++summary.needs_review;
        }
    }
    return summary;
}

}  // namespace rubriceval

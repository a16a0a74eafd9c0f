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

#include <algorithm>
#include <filesystem>

#include "builders.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/judge.hpp"
#include "rubriceval/report.hpp"
#include "rubriceval/rubric_io.hpp"
#include "test_util.hpp"

using namespace rubriceval;
using builders::item;

namespace {

// Judge closure over the deterministic mock judge.
GradeSheet mock_judge_fn(const RubricSet& set, const std::string& response) {
    ParsedVerdict verdict = mock_grade(set, response);
    verdict.sheet.judge_name = "mock";
    return verdict.sheet;
}

std::vector<CorpusEntry> tiny_corpus() {
    std::vector<CorpusEntry> corpus;
    for (int i = 1; i <= 3; ++i) {
        const std::string id = "t" + std::to_string(i);
        RubricSet set = builders::set(
            id, {item("Covers topic " + id, Tier::kEssential, 2.0),
                 item("Mentions caveat " + id, Tier::kImportant, 1.0),
                 item("Cites source " + id, Tier::kHighlight, 1.0),
                 item("Recommends harm " + id, Tier::kPitfall, 1.0)});
        // The builder's FullyMet description is "Covers <title>."; repeating
        // every positive title in the response satisfies all of them.
        CorpusEntry entry;
        entry.response = "Covers Covers topic " + id +
                         ". Covers Mentions caveat " + id +
                         ". Covers Cites source " + id + ".";
        entry.rubric = std::move(set);
        corpus.push_back(std::move(entry));
    }
    return corpus;
}

}  // namespace

TEST_CASE("word_count splits on whitespace and falls back to code points") {
    CHECK(word_count("") == 0);
    CHECK(word_count("   \n\t ") == 0);
    CHECK(word_count("plain words count here") == 4);
    CHECK(word_count("  leading and trailing   spaces , punct. ") == 6);
    // One unbroken run longer than 20 code points is treated as unsegmented
    // text and counted by code points (e.g. CJK without spaces).
    const std::string cjk =
        "服用肠溶胶囊的正确方法"
        "是整粒吞服不可咀嚼破坏";
    CHECK(word_count(cjk) == 22);
    // Two short tokens stay token-counted even if one is multibyte.
    CHECK(word_count("服用 capsule") == 2);
}

TEST_CASE("evaluate_batch scores a corpus and persists a resumable run") {
    testutil::TempDir tmp("batch");
    const std::string run_path = tmp.file("run.jsonl");
    const auto corpus = tiny_corpus();

    const EvaluationRun run =
        evaluate_batch(run_path, "model-x", "mock", corpus, mock_judge_fn,
                       ScoringConfig{});
    CHECK(run.model_name == "model-x");
    CHECK(run.results.size() == 3);
    CHECK(run.errors.empty());
    for (const auto& result : run.results) {
        // Perfect positive coverage, no pitfall, under weights 2:1:1:2:
        // (2*2 + 1 + 1 - 0) / (2*2 + 1 + 1 - 2*1) = 6/4.
        CHECK(result.ablation.base == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(result.ablation.with_both ==
              doctest::Approx(result.ablation.base).epsilon(1e-12));
        CHECK(result.response_length == word_count(
            "Covers Covers topic t1. Covers Mentions caveat t1. "
            "Covers Cites source t1."));
        CHECK(result.items.size() == 4);
    }

    // Re-running the same corpus resumes: every query is already done, so
    // the judge must never be called again.
    int calls = 0;
    const auto counting_judge = [&](const RubricSet& set,
                                    const std::string& response) {
        ++calls;
        return mock_judge_fn(set, response);
    };
    const EvaluationRun resumed =
        evaluate_batch(run_path, "model-x", "mock", corpus, counting_judge,
                       ScoringConfig{});
    CHECK(calls == 0);
    CHECK(resumed.results.size() == 3);
    CHECK(resumed.run_id == run.run_id);

    // A conflicting model name on the same run file is rejected.
    CHECK_THROWS_AS(evaluate_batch(run_path, "other-model", "mock", corpus,
                                   mock_judge_fn, ScoringConfig{}),
                    InvalidConfig);
}

TEST_CASE("evaluate_batch isolates per-query judge failures") {
    testutil::TempDir tmp("batch-err");
    auto corpus = tiny_corpus();
    const auto flaky_judge = [](const RubricSet& set,
                                const std::string& response) -> GradeSheet {
        if (set.query_id == "t2") {
            throw TransportError("judge endpoint unreachable");
        }
        return mock_judge_fn(set, response);
    };
    const EvaluationRun run =
        evaluate_batch(tmp.file("run.jsonl"), "model-x", "mock", corpus,
                       flaky_judge, ScoringConfig{});
    CHECK(run.results.size() == 2);
    REQUIRE(run.errors.size() == 1);
    CHECK(run.errors[0].query_id == "t2");
    CHECK(run.errors[0].error.find("unreachable") != std::string::npos);

    // Error records are part of the checkpoint: a resume does not silently
    // re-judge the failed query, it keeps the recorded error.
    const EvaluationRun resumed =
        evaluate_batch(tmp.file("run.jsonl"), "model-x", "mock", corpus,
                       mock_judge_fn, ScoringConfig{});
    CHECK(resumed.results.size() == 2);
    REQUIRE(resumed.errors.size() == 1);
    CHECK(resumed.errors[0].query_id == "t2");
}

TEST_CASE("run files round-trip results, errors, and config") {
    testutil::TempDir tmp("roundtrip");
    const std::string run_path = tmp.file("run.jsonl");
    ScoringConfig config;
    config.tier_weights[Tier::kEssential] = 3.0;
    const EvaluationRun run = evaluate_batch(
        run_path, "model-x", "mock", tiny_corpus(), mock_judge_fn, config);
    const EvaluationRun loaded = load_run_file(run_path);
    CHECK(loaded.run_id == run.run_id);
    CHECK(loaded.model_name == run.model_name);
    CHECK(loaded.judge_name == run.judge_name);
    CHECK(loaded.config == config);
    REQUIRE(loaded.results.size() == run.results.size());
    for (std::size_t i = 0; i < loaded.results.size(); ++i) {
        CHECK(loaded.results[i].query_id == run.results[i].query_id);
        CHECK(loaded.results[i].ablation == run.results[i].ablation);
        CHECK(loaded.results[i].items.size() == run.results[i].items.size());
    }
    CHECK_THROWS_AS(load_run_file(tmp.file("missing.jsonl")), IoError);

    testutil::spill(tmp.file("no-meta.jsonl"),
                    "{\"record\": \"query_result\", \"query_id\": \"x\"}\n");
    CHECK_THROWS_AS(load_run_file(tmp.file("no-meta.jsonl")), SchemaViolation);
}

TEST_CASE("leaderboards sort by the requested key with stable tie-breaks") {
    const auto make_run = [](const std::string& model, double grade) {
        testutil::TempDir tmp("lb-" + model);
        const RubricSet set = builders::set(
            "q", {item("Covers it", Tier::kEssential, 1.0),
                  item("Extra", Tier::kImportant, 1.0)});
        std::vector<CorpusEntry> corpus = {{set, "resp"}};
        const auto judge = [&](const RubricSet& s, const std::string&) {
            return builders::sheet(s, {grade, grade});
        };
        return evaluate_batch(tmp.file(model + ".jsonl"), model, "fixed",
                              corpus, judge, ScoringConfig{});
    };
    const std::vector<EvaluationRun> runs = {
        make_run("middling", 0.5), make_run("strong", 1.0),
        make_run("weak", 0.0), make_run("also-strong", 1.0)};

    LeaderboardOptions options;
    options.sort_key = LeaderboardSortKey::kBase;
    const auto rows = build_leaderboard(runs, options);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rank == 1);
    // Equal scores tie-break on the model name, ascending.
    CHECK(rows[0].model == "also-strong");
    CHECK(rows[1].model == "strong");
    CHECK(rows[2].model == "middling");
    CHECK(rows[3].model == "weak");
    CHECK(rows[3].rank == 4);
    // Scores span 0..100: deciles put the leaders in bucket 1, the tail in 10.
    CHECK(rows[0].bucket == 1);
    CHECK(rows[1].bucket == 1);
    CHECK(rows[3].bucket == 10);
    CHECK(rows[0].base_pct == doctest::Approx(100.0));
    CHECK(rows[3].base_pct == doctest::Approx(0.0));
}

TEST_CASE("custom bucket edges override the decile scheme") {
    const RubricSet set = builders::set(
        "q", {item("Covers it", Tier::kEssential, 1.0)});
    const auto run_with = [&](const std::string& model, double grade) {
        testutil::TempDir tmp("edge-" + model);
        std::vector<CorpusEntry> corpus = {{set, "resp"}};
        const auto judge = [&](const RubricSet& s, const std::string&) {
            return builders::sheet(s, {grade});
        };
        return evaluate_batch(tmp.file("r.jsonl"), model, "fixed", corpus,
                              judge, ScoringConfig{});
    };
    const std::vector<EvaluationRun> runs = {run_with("top", 1.0),
                                             run_with("mid", 0.5),
                                             run_with("low", 0.0)};
    LeaderboardOptions options;
    options.sort_key = LeaderboardSortKey::kBase;
    options.bucket_edges = {75.0, 25.0};  // >75 -> 1, >25 -> 2, else 3
    const auto rows = build_leaderboard(runs, options);
    CHECK(rows[0].bucket == 1);
    CHECK(rows[1].bucket == 2);
    CHECK(rows[2].bucket == 3);
}

TEST_CASE("leaderboard construction rejects inconsistent ablation rows") {
    EvaluationRun run;
    run.run_id = "bad";
    run.model_name = "broken";
    QueryResult result;
    result.query_id = "q";
    result.ablation.base = 0.4;
    result.ablation.with_saturation = 0.6;  // mechanism gained points
    result.ablation.with_truncation = 0.4;
    result.ablation.with_both = 0.4;
    run.results.push_back(result);
    CHECK_THROWS_AS(build_leaderboard({run}), ReportInvariantViolation);
}

TEST_CASE("markdown and CSV leaderboards carry the table shape") {
    testutil::TempDir tmp("render");
    const EvaluationRun run =
        evaluate_batch(tmp.file("run.jsonl"), "model-x", "mock", tiny_corpus(),
                       mock_judge_fn, ScoringConfig{});
    const auto rows = build_leaderboard({run});
    const std::string markdown = render_leaderboard_markdown(rows);
    CHECK(markdown.find("| Rank | Model | Bucket |") != std::string::npos);
    CHECK(markdown.find("model-x") != std::string::npos);
    // Unclamped scores above 100% are flagged with a footnote.
    CHECK(markdown.find("*") != std::string::npos);
    CHECK(markdown.find("outside the nominal [0, 100] range") !=
          std::string::npos);

    const std::string csv = render_leaderboard_csv(rows);
    CHECK(csv.rfind("rank,model,bucket,", 0) == 0);
    CHECK(csv.find("model-x") != std::string::npos);

    const std::string json = leaderboard_to_json(rows);
    CHECK(json.find("\"model\"") != std::string::npos);
    CHECK(json.find("\"base_pct\"") != std::string::npos);
}

TEST_CASE("breakdown reports group mean grades by axis") {
    EvaluationRun run;
    run.run_id = "r";
    run.model_name = "m";
    QueryResult result;
    result.query_id = "q";
    ItemResult a;
    a.title = "E item";
    a.tier = Tier::kEssential;
    a.difficulty = DifficultyLabel::kBasic;
    a.grade = 1.0;
    ItemResult b;
    b.title = "I item";
    b.tier = Tier::kImportant;
    b.tag = CapabilityTag::kSafety;
    b.perspective = PerspectiveLabel::kDepth;
    b.grade = 0.5;
    ItemResult c;
    c.title = "H item";
    c.tier = Tier::kHighlight;
    c.grade = 0.0;
    result.items = {a, b, c};
    result.ablation = {0.5, 0.5, 0.5, 0.5};
    run.results.push_back(result);

    const auto by_tier = breakdown_report(run, BreakdownAxis::kTier);
    REQUIRE(by_tier.size() == 3);  // no Pitfall items -> no Pitfall row
    CHECK(by_tier[0].axis_value == "Essential");
    CHECK(by_tier[0].mean_rate_pct == doctest::Approx(100.0));
    CHECK(by_tier[1].axis_value == "Important");
    CHECK(by_tier[1].mean_rate_pct == doctest::Approx(50.0));

    const auto by_tag = breakdown_report(run, BreakdownAxis::kTag);
    REQUIRE(by_tag.size() == 2);
    CHECK(by_tag[0].axis_value == "Safety");
    CHECK(by_tag[1].axis_value == "(unlabeled)");
    CHECK(by_tag[1].item_count == 2);

    const auto by_difficulty = breakdown_report(run, BreakdownAxis::kDifficulty);
    REQUIRE(by_difficulty.size() == 2);  // Basic plus the unlabeled items
    CHECK(by_difficulty[0].axis_value == "Basic");
    CHECK(by_difficulty[0].item_count == 1);
    CHECK(by_difficulty[1].axis_value == "(unlabeled)");
    CHECK(by_difficulty[1].item_count == 2);

    const std::string markdown =
        render_breakdown_markdown(by_tier, BreakdownAxis::kTier);
    CHECK(markdown.find("Essential") != std::string::npos);

    CHECK(breakdown_axis_from_string("tag") == BreakdownAxis::kTag);
    CHECK(breakdown_axis_from_string("CapabilityTag") == BreakdownAxis::kTag);
    CHECK_FALSE(breakdown_axis_from_string("zodiac").has_value());
}

TEST_CASE("length statistics summarize response word counts") {
    EvaluationRun run;
    for (const long long n : {12LL, 4LL, 9LL, 30LL}) {
        QueryResult result;
        result.query_id = "q" + std::to_string(n);
        result.response_length = n;
        result.ablation = {0.5, 0.5, 0.5, 0.5};
        run.results.push_back(result);
    }
    const LengthStats stats = length_stats(run);
    CHECK(stats.n == 4);
    CHECK(stats.mean == doctest::Approx((12 + 4 + 9 + 30) / 4.0));
    CHECK(stats.median == doctest::Approx((9 + 12) / 2.0));
    CHECK(stats.min == 4);
    CHECK(stats.max == 30);
    CHECK(length_stats(EvaluationRun{}).n == 0);
}

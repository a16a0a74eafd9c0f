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

#ifndef RUBRICEVAL_REPORT_HPP_
#define RUBRICEVAL_REPORT_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rubriceval/rubric.hpp"
#include "rubriceval/scoring.hpp"

namespace rubriceval {

// Word count: whitespace tokens; when tokenization yields a single token
// longer than 20 characters the count falls back to Unicode code points
// (script-without-spaces heuristic).
long long word_count(const std::string& text);

// Compact per-item record persisted with each query result so run files are
// self-contained for axis breakdowns.
struct ItemResult {
    std::string title;
    Tier tier = Tier::kEssential;
    double weight = 1.0;
    std::optional<CapabilityTag> tag;
    std::optional<DifficultyLabel> difficulty;
    std::optional<PerspectiveLabel> perspective;
    Grade grade = 0.0;
};

struct QueryResult {
    std::string query_id;
    long long response_length = 0;
    AblationScores ablation;
    std::map<Tier, TierTotals> totals;
    std::map<Tier, double> rates;
    std::vector<ItemResult> items;
};

struct QueryError {
    std::string query_id;
    std::string error;
};

// One model's evaluation over a corpus, with the config snapshot that
// produced it. Persisted as a JSON-lines run file: a run_meta header
// followed by query_result / query_error records. The file doubles as the
// checkpoint: on resume, query_ids already present are not re-judged.
struct EvaluationRun {
    std::string run_id;
    std::string model_name;
    std::string judge_name;
    ScoringConfig config;
    std::vector<QueryResult> results;
    std::vector<QueryError> errors;
};

std::string run_meta_to_json(const EvaluationRun& run);
std::string query_result_to_json(const QueryResult& result);
EvaluationRun load_run_file(const std::string& path);

// Judge function: (rubric set, response) -> grade sheet. The report layer
// does not care whether a live client or the mock judge backs it.
using JudgeFn =
    std::function<GradeSheet(const RubricSet&, const std::string& response)>;

struct CorpusEntry {
    RubricSet rubric;
    std::string response;
};

// Evaluates one model over a corpus and appends to the run file at
// `run_path` (created with a run_meta header when absent). Entries whose
// query_id already appears in the file are skipped. Judge failures become
// query_error records; the returned run reflects the file after the pass.
EvaluationRun evaluate_batch(const std::string& run_path,
                             const std::string& model_name,
                             const std::string& judge_name,
                             const std::vector<CorpusEntry>& corpus,
                             const JudgeFn& judge, const ScoringConfig& config);

struct LeaderboardRow {
    int rank = 0;
    std::string model;
    int bucket = 1;  // 1 = top decile of the observed score range
    double avg_length = 0.0;
    double base_pct = 0.0;
    double saturation_pct = 0.0;
    double truncation_pct = 0.0;
    double both_pct = 0.0;
    std::map<Tier, double> tier_rates_pct;
    std::size_t queries = 0;
    std::size_t errors = 0;
};

enum class LeaderboardSortKey { kBase, kSaturation, kTruncation, kBoth };

struct LeaderboardOptions {
    LeaderboardSortKey sort_key = LeaderboardSortKey::kBoth;
    // Custom bucket edges on the sort-key percentage, descending order not
    // required; empty -> deciles of the observed range.
    std::vector<double> bucket_edges;
};

// Aggregates runs into ranked rows (ties broken by model name). Order of
// runs and of results inside a run never changes a reported number. Asserts
// the cross-mechanism inequalities (both <= min(sat, trunc), and each
// single mechanism <= base + epsilon) per row and throws
// ReportInvariantViolation when one fails.
std::vector<LeaderboardRow> build_leaderboard(
    const std::vector<EvaluationRun>& runs,
    const LeaderboardOptions& options = {});

// Fixed-format markdown (two decimals). Scores outside [0, 100] are
// footnoted, not clamped. Rendering is deterministic: equal inputs produce
// byte-identical output.
std::string render_leaderboard_markdown(const std::vector<LeaderboardRow>& rows);
std::string render_leaderboard_csv(const std::vector<LeaderboardRow>& rows);
std::string leaderboard_to_json(const std::vector<LeaderboardRow>& rows);

// Per-axis breakdown over a run: mean earned-rate and item count per axis
// value. Axis: tier, capability tag, difficulty or perspective.
enum class BreakdownAxis { kTier, kTag, kDifficulty, kPerspective };
std::optional<BreakdownAxis> breakdown_axis_from_string(const std::string& label);

struct BreakdownRow {
    std::string axis_value;
    double mean_rate_pct = 0.0;  // mean of grade (sign-free) in percent
    std::size_t item_count = 0;
};
std::vector<BreakdownRow> breakdown_report(const EvaluationRun& run,
                                           BreakdownAxis axis);
std::string render_breakdown_markdown(const std::vector<BreakdownRow>& rows,
                                      BreakdownAxis axis);

struct LengthStats {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    long long min = 0;
    long long max = 0;
};
LengthStats length_stats(const EvaluationRun& run);

}  // namespace rubriceval

#endif  // RUBRICEVAL_REPORT_HPP_

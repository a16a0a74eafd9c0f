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

#ifndef RUBRICEVAL_CONSISTENCY_HPP_
#define RUBRICEVAL_CONSISTENCY_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rubriceval/rubric.hpp"
#include "rubriceval/scoring.hpp"

namespace rubriceval {

// Two scorers' totals for the same sample, in raw points. Optional
// per-dimension pairs allow dimension-level reports.
struct ScorePair {
    std::string sample_id;
    double scorer_a = 0.0;
    double scorer_b = 0.0;
    std::map<Tier, std::pair<double, double>> by_dimension;
};

enum class DeviationTier { kComplete, kAcceptable, kModerate, kSevere };
const std::string& to_string(DeviationTier t);

// Bucket thresholds on |delta|. Buckets are left-open: Complete covers
// [0, complete_max], Acceptable (complete_max, acceptable_max], Moderate
// (acceptable_max, severe_min], Severe everything above. In percent mode the
// thresholds are percentages of the declared score-range span.
struct DeviationSpec {
    double complete_max = 4.0;
    double acceptable_max = 8.0;
    double severe_min = 12.0;
    bool percent_of_range = false;
    double range_min = -10.0;
    double range_max = 30.0;

    // Total-score buckets: 4 / 8 / 12 points (10% / 20% / 30% of the span).
    static DeviationSpec total_score();
    // Sub-criterion buckets: 1 / 2 / 3 points.
    static DeviationSpec sub_criterion();
};

// Buckets one absolute deviation. Throws InvalidConfig when the spec is not
// strictly increasing or (in percent mode) the range is empty.
DeviationTier classify_deviation(double delta, const DeviationSpec& spec);

double mean_absolute_error(const std::vector<ScorePair>& pairs);

// Sample Pearson correlation. Throws InvalidConfig for n < 2 or when either
// side has zero variance.
double pearson_r(const std::vector<ScorePair>& pairs);

// Two-sided p-value for r under the t-distribution with n-2 degrees of
// freedom (standard approximation). Requires n >= 3.
double pearson_p_value(double r, std::size_t n);

struct DeviationHistogram {
    std::map<DeviationTier, std::size_t> counts;
    std::map<DeviationTier, double> fractions;  // counts / n
};

struct ConsistencyReport {
    std::size_t n = 0;
    double mae = 0.0;
    std::optional<double> pearson;   // absent when undefined (n < 2, no variance)
    std::optional<double> p_value;   // absent when pearson is or n < 3
    DeviationHistogram histogram;
    std::map<Tier, ConsistencyReport> dimensions;  // only when pairs carry them
};

ConsistencyReport build_consistency_report(
    const std::vector<ScorePair>& pairs,
    const DeviationSpec& spec = DeviationSpec::total_score(),
    const DeviationSpec& dimension_spec = DeviationSpec::sub_criterion());

std::string consistency_report_to_json(const ConsistencyReport& report);
// Markdown table: one row for the total plus one per dimension present.
std::string render_consistency_markdown(const ConsistencyReport& report);

// Score-pair IO. JSONL: one object per line with "sample_id", "scorer_a",
// "scorer_b" and optional "dimensions" {tier: {"a":..., "b":...}}. CSV:
// header sample_id,scorer_a,scorer_b. Dispatch is by file extension.
std::vector<ScorePair> load_score_pairs(const std::string& path);

// A human preference between two responses plus everything needed to rescore
// both sides under any config.
enum class Preference { kA, kB };
struct PairwisePreferenceSample {
    std::string query_id;
    RubricSet rubric;
    GradeSheet grades_a;
    GradeSheet grades_b;
    Preference human_preference = Preference::kA;
};

struct ConcordanceOutcome {
    std::size_t correct = 0;
    std::size_t reversed = 0;
    std::size_t tied = 0;  // |score_a - score_b| < tie_epsilon, excluded
    // correct / reversed; +infinity when reversed == 0.
    double ratio() const;
};

// Scores both sides of each sample under `config` (weighted_score) and
// compares the induced order with the human preference.
ConcordanceOutcome concordance_ratio(
    const std::vector<PairwisePreferenceSample>& samples,
    const ScoringConfig& config, double tie_epsilon = 1e-9);

struct WeightSweepRow {
    std::string label;  // e.g. "2:1:1:2"
    ScoringConfig config;
    ConcordanceOutcome outcome;
};

// Runs concordance_ratio once per config. Labels are E:I:H:P weight strings.
std::vector<WeightSweepRow> weight_sweep(
    const std::vector<PairwisePreferenceSample>& samples,
    const std::vector<ScoringConfig>& configs, double tie_epsilon = 1e-9);

std::string render_weight_sweep_markdown(const std::vector<WeightSweepRow>& rows);

// JSONL: {"query_id", "human_preference": "A"|"B", "rubric": <document>,
// "grades_a": <grade sheet>, "grades_b": <grade sheet>} per line.
std::vector<PairwisePreferenceSample> load_preference_samples(
    const std::string& path);
std::string preference_sample_to_json(const PairwisePreferenceSample& sample);

}  // namespace rubriceval

#endif  // RUBRICEVAL_CONSISTENCY_HPP_

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

#ifndef RUBRICEVAL_SCORING_HPP_
#define RUBRICEVAL_SCORING_HPP_

#include <map>
#include <string>

#include "rubriceval/rubric.hpp"

namespace rubriceval {

// All knobs of the scoring pipeline. Mechanisms are off by default; the
// default tier weights follow the 2:1:1:2 emphasis on Essential/Pitfall.
struct ScoringConfig {
    std::map<Tier, double> tier_weights = {
        {Tier::kEssential, 2.0},
        {Tier::kImportant, 1.0},
        {Tier::kHighlight, 1.0},
        {Tier::kPitfall, 2.0},
    };
    bool truncation_enabled = false;
    double ratio_essential = 0.5;  // Essential floor as a fraction of capacity
    double ratio_pitfall = 0.5;    // Pitfall ceiling as a fraction of capacity
    bool saturation_enabled = false;
    double saturation_cap = 3.0;        // per-bucket cap L on raw points
    double essential_multiplier = 2.0;  // Important+Highlight <= m * raw_Essential

    bool operator==(const ScoringConfig&) const = default;
};

// Throws InvalidConfig unless all weights are positive, both ratios are in
// (0, 1], and cap/multiplier are positive.
void validate_config(const ScoringConfig& config);

// Per-tier raw sum and capacity in raw points (capacity = sum of weights).
struct TierTotals {
    double raw = 0.0;
    double capacity = 0.0;

    bool operator==(const TierTotals&) const = default;
};

// Sums grade * weight per tier. Capacities count every item; raws count the
// graded value. Throws GradeMismatch when the sheet's titles are not exactly
// the set's titles.
std::map<Tier, TierTotals> raw_dimension_scores(const RubricSet& set,
                                                const GradeSheet& grades);

// Unweighted normalized score: (positive raw - pitfall raw) over
// (positive capacity - pitfall capacity). Unclamped; may exceed 1 or drop
// below 0. Throws DegenerateDenominator when the denominator is <= 0.
double base_score(const RubricSet& set, const GradeSheet& grades);

// Hard-rejection gate. Returns adjusted totals: when the Essential raw is
// strictly below ratio_essential * Essential capacity, or the Pitfall raw is
// strictly above ratio_pitfall * Pitfall capacity, the Important and
// Highlight raws are zeroed. Other tiers and all capacities are untouched.
// Tiers absent from `totals` are treated as empty (raw 0, capacity 0).
std::map<Tier, TierTotals> apply_truncation(
    const std::map<Tier, TierTotals>& totals, const ScoringConfig& config);

// Diminishing-returns cap over Important+Highlight raw points, partitioned
// by capability tag (untagged items share one bucket): each bucket is capped
// at saturation_cap, the capped sum is further capped at
// essential_multiplier * Essential raw, and the surplus is the clip.
struct SaturationOutcome {
    std::map<Tier, TierTotals> totals;  // adjusted Important/Highlight raws
    double clip = 0.0;                  // points removed, always >= 0
};
SaturationOutcome apply_saturation(const RubricSet& set,
                                   const GradeSheet& grades,
                                   const std::map<Tier, TierTotals>& totals,
                                   const ScoringConfig& config);

// Full scoring result for one (set, grades) pair under one config.
struct ScoreBreakdown {
    // Unadjusted sums (pre-mechanism); these back the per-dimension rate
    // columns of reports. 0 <= raw <= capacity per tier.
    std::map<Tier, TierTotals> totals;
    // raw / capacity per tier; Pitfall rate carries a negative sign.
    // Empty tiers (capacity 0) report rate 0.
    std::map<Tier, double> rates;
    double overall = 0.0;
    bool truncated = false;
    double saturation_clip = 0.0;
    ScoringConfig config;
};

// Tier-weighted score with the configured mechanisms applied in order:
// truncation, then saturation, then weighting. With unit weights and both
// mechanisms off this equals base_score exactly. Throws
// DegenerateDenominator when the weighted denominator is <= 0.
ScoreBreakdown weighted_score(const RubricSet& set, const GradeSheet& grades,
                              const ScoringConfig& config);

// The four mechanism combinations of one config, all under the config's own
// tier weights: no mechanisms, saturation only, truncation only, and both.
// The config's own mechanism flags are ignored. Because the mechanisms only
// remove Important/Highlight raw points, base >= with_saturation,
// base >= with_truncation, and with_both <= min of the single-mechanism
// scores on every input.
struct AblationScores {
    double base = 0.0;
    double with_saturation = 0.0;
    double with_truncation = 0.0;
    double with_both = 0.0;

    bool operator==(const AblationScores&) const = default;
};
AblationScores ablation_suite(const RubricSet& set, const GradeSheet& grades,
                              const ScoringConfig& config);

// JSON records with stable field names.
std::string breakdown_to_json(const ScoreBreakdown& breakdown);
std::string ablation_to_json(const AblationScores& scores);
std::string scoring_config_to_json(const ScoringConfig& config);
ScoringConfig parse_scoring_config(const std::string& document_json);

}  // namespace rubriceval

#endif  // RUBRICEVAL_SCORING_HPP_

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

#include <cmath>

#include "builders.hpp"
#include "oracle.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/scoring.hpp"

using namespace rubriceval;
using builders::item;

namespace {

ScoringConfig unit_weights() {
    ScoringConfig config;
    config.tier_weights = {{Tier::kEssential, 1.0},
                           {Tier::kImportant, 1.0},
                           {Tier::kHighlight, 1.0},
                           {Tier::kPitfall, 1.0}};
    return config;
}

}  // namespace

TEST_CASE("raw dimension scores sum grade times weight per tier") {
    const RubricSet set = builders::set(
        "raw", {item("E one", Tier::kEssential, 2.0),
                item("E two", Tier::kEssential, 1.0),
                item("I one", Tier::kImportant, 1.5),
                item("P one", Tier::kPitfall, 2.0)});
    const GradeSheet grades = builders::sheet(set, {1.0, 0.5, 1.0, 0.5});
    const auto totals = raw_dimension_scores(set, grades);
    CHECK(totals.at(Tier::kEssential).raw == 2.5);
    CHECK(totals.at(Tier::kEssential).capacity == 3.0);
    CHECK(totals.at(Tier::kImportant).raw == 1.5);
    CHECK(totals.at(Tier::kHighlight).raw == 0.0);
    CHECK(totals.at(Tier::kHighlight).capacity == 0.0);
    CHECK(totals.at(Tier::kPitfall).raw == 1.0);
    CHECK(totals.at(Tier::kPitfall).capacity == 2.0);
}

TEST_CASE("raw dimension scores reject mismatched grade sheets") {
    const RubricSet set =
        builders::set("mm", {item("Present", Tier::kEssential, 1.0)});
    GradeSheet missing;
    missing.query_id = set.query_id;
    CHECK_THROWS_AS(raw_dimension_scores(set, missing), GradeMismatch);

    GradeSheet extra = builders::sheet(set, {1.0});
    extra.grades["Phantom item"] = 0.5;
    CHECK_THROWS_AS(raw_dimension_scores(set, extra), GradeMismatch);
}

TEST_CASE("base score is the unweighted signed ratio, unclamped") {
    const RubricSet set = builders::set(
        "base", {item("E", Tier::kEssential, 2.0),
                 item("I", Tier::kImportant, 1.0),
                 item("H", Tier::kHighlight, 1.0),
                 item("P", Tier::kPitfall, 1.0)});
    // (2 + 0.5 + 0 - 1) / (2 + 1 + 1 - 1) = 1.5 / 3
    const GradeSheet grades = builders::sheet(set, {1.0, 0.5, 0.0, 1.0});
    CHECK(base_score(set, grades) == doctest::Approx(0.5).epsilon(1e-15));

    // A full pitfall with nothing else drives the score negative.
    const GradeSheet toxic = builders::sheet(set, {0.0, 0.0, 0.0, 1.0});
    CHECK(base_score(set, toxic) < 0.0);
}

TEST_CASE("degenerate denominators throw") {
    const RubricSet only_pitfall =
        builders::set("dp", {item("P", Tier::kPitfall, 2.0)});
    const GradeSheet grades = builders::sheet(only_pitfall, {0.0});
    CHECK_THROWS_AS(base_score(only_pitfall, grades), DegenerateDenominator);

    const RubricSet balanced = builders::set(
        "db", {item("E", Tier::kEssential, 1.0), item("P", Tier::kPitfall, 1.0)});
    const GradeSheet even = builders::sheet(balanced, {1.0, 0.0});
    CHECK_THROWS_AS(base_score(balanced, even), DegenerateDenominator);
    CHECK_THROWS_AS(weighted_score(balanced, even, ScoringConfig{}),
                    DegenerateDenominator);
}

TEST_CASE("truncation zeroes Important and Highlight only when tripped") {
    ScoringConfig config;
    config.truncation_enabled = true;

    const RubricSet set = builders::set(
        "tr", {item("E one", Tier::kEssential, 1.0),
               item("E two", Tier::kEssential, 1.0),
               item("I", Tier::kImportant, 1.0),
               item("H", Tier::kHighlight, 1.0),
               item("P", Tier::kPitfall, 2.0)});

    // Essential raw 1.0 of capacity 2.0 sits exactly on the 0.5 floor and
    // the comparison is strict, so nothing is zeroed.
    const GradeSheet boundary = builders::sheet(set, {1.0, 0.0, 1.0, 1.0, 0.0});
    const ScoreBreakdown at_floor = weighted_score(set, boundary, config);
    CHECK_FALSE(at_floor.truncated);

    // One half-grade below the floor trips the gate.
    const GradeSheet below = builders::sheet(set, {0.5, 0.0, 1.0, 1.0, 0.0});
    const ScoreBreakdown tripped = weighted_score(set, below, config);
    CHECK(tripped.truncated);
    // Pre-mechanism totals still report the ungated sums.
    CHECK(tripped.totals.at(Tier::kImportant).raw == 1.0);

    // A pitfall above its ceiling trips the gate from the other side.
    const GradeSheet hazardous = builders::sheet(set, {1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(weighted_score(set, hazardous, config).truncated);
    const GradeSheet minor = builders::sheet(set, {1.0, 1.0, 1.0, 1.0, 0.5});
    CHECK_FALSE(weighted_score(set, minor, config).truncated);
}

TEST_CASE("truncation treats absent tiers as empty") {
    std::map<Tier, TierTotals> totals;
    totals[Tier::kImportant] = {2.0, 2.0};
    ScoringConfig config;
    config.truncation_enabled = true;
    // No Essential capacity: the floor comparison 0 < 0.5 * 0 is false.
    const auto adjusted = apply_truncation(totals, config);
    CHECK(adjusted.at(Tier::kImportant).raw == 2.0);
    CHECK(adjusted.at(Tier::kEssential).capacity == 0.0);
}

TEST_CASE("saturation spec example: buckets 5 and 1 with a slack bound") {
    // Two tag buckets sum to 5 and 1; L = 3 caps the first; the essential
    // allowance 2 * 8 = 16 is slack. Combined = min(3 + 1, 16) = 4, clip 2.
    std::vector<RubricItem> items;
    items.push_back(item("E big", Tier::kEssential, 8.0));
    items.push_back(item("I safety", Tier::kImportant, 5.0,
                         CapabilityTag::kSafety));
    items.push_back(item("H read", Tier::kHighlight, 1.0,
                         CapabilityTag::kReadability));
    const RubricSet set = builders::set("sat", std::move(items));
    const GradeSheet grades = builders::sheet(set, {1.0, 1.0, 1.0});

    ScoringConfig config;
    config.saturation_enabled = true;
    const auto totals = raw_dimension_scores(set, grades);
    const SaturationOutcome outcome =
        apply_saturation(set, grades, totals, config);
    CHECK(outcome.clip == doctest::Approx(2.0).epsilon(1e-15));
    const double combined = outcome.totals.at(Tier::kImportant).raw +
                            outcome.totals.at(Tier::kHighlight).raw;
    CHECK(combined == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("saturation is a no-op when buckets and bound are slack") {
    const RubricSet set = builders::set(
        "noop", {item("E", Tier::kEssential, 2.0),
                 item("I", Tier::kImportant, 1.0, CapabilityTag::kSafety),
                 item("H", Tier::kHighlight, 1.0)});
    const GradeSheet grades = builders::sheet(set, {1.0, 1.0, 1.0});
    ScoringConfig config;
    config.saturation_enabled = true;
    const auto totals = raw_dimension_scores(set, grades);
    const SaturationOutcome outcome =
        apply_saturation(set, grades, totals, config);
    CHECK(outcome.clip == 0.0);
    CHECK(outcome.totals.at(Tier::kImportant).raw == 1.0);
    CHECK(outcome.totals.at(Tier::kHighlight).raw == 1.0);
}

TEST_CASE("zero essential raw zeroes the combined mass") {
    const RubricSet set = builders::set(
        "ez", {item("E", Tier::kEssential, 2.0),
               item("I", Tier::kImportant, 2.0),
               item("H", Tier::kHighlight, 2.0)});
    const GradeSheet grades = builders::sheet(set, {0.0, 1.0, 1.0});
    ScoringConfig config;
    config.saturation_enabled = true;
    const auto totals = raw_dimension_scores(set, grades);
    const SaturationOutcome outcome =
        apply_saturation(set, grades, totals, config);
    CHECK(outcome.totals.at(Tier::kImportant).raw == 0.0);
    CHECK(outcome.totals.at(Tier::kHighlight).raw == 0.0);
    CHECK(outcome.clip == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("weighted score matches the oracle on mechanism compositions") {
    const RubricSet set = builders::set(
        "wx", {item("E one", Tier::kEssential, 2.0),
               item("E two", Tier::kEssential, 1.0),
               item("I one", Tier::kImportant, 2.0, CapabilityTag::kSafety),
               item("I two", Tier::kImportant, 1.0),
               item("H one", Tier::kHighlight, 2.0, CapabilityTag::kSafety),
               item("P one", Tier::kPitfall, 1.0)});
    const std::vector<std::vector<double>> sheets = {
        {1.0, 1.0, 1.0, 1.0, 1.0, 0.0}, {0.5, 0.0, 1.0, 1.0, 1.0, 1.0},
        {1.0, 0.5, 0.5, 0.0, 1.0, 0.5}, {0.0, 0.0, 0.5, 1.0, 0.0, 0.0},
    };
    for (int mask = 0; mask < 4; ++mask) {
        ScoringConfig config;
        config.truncation_enabled = (mask & 1) != 0;
        config.saturation_enabled = (mask & 2) != 0;
        for (const auto& grades : sheets) {
            const GradeSheet sheet = builders::sheet(set, grades);
            double clip = 0.0;
            const auto expected = oracle::full_score(set, sheet, config, &clip);
            REQUIRE(expected.has_value());
            const ScoreBreakdown breakdown = weighted_score(set, sheet, config);
            CHECK(breakdown.overall ==
                  doctest::Approx(*expected).epsilon(1e-12));
            CHECK(breakdown.saturation_clip ==
                  doctest::Approx(clip).epsilon(1e-12));
        }
    }
}

TEST_CASE("unit tier weights reproduce the base score exactly") {
    const RubricSet set = builders::set(
        "id", {item("E", Tier::kEssential, 2.0),
               item("I", Tier::kImportant, 1.5),
               item("H", Tier::kHighlight, 0.5),
               item("P", Tier::kPitfall, 1.0)});
    for (const auto& grades : std::vector<std::vector<double>>{
             {1.0, 0.5, 0.0, 1.0}, {0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 1.0, 0.0}}) {
        const GradeSheet sheet = builders::sheet(set, grades);
        // Bit-exact equality, not approximate: both paths must share the
        // same accumulation order.
        CHECK(weighted_score(set, sheet, unit_weights()).overall ==
              base_score(set, sheet));
    }
}

TEST_CASE("per-tier rates are scale invariant and pitfall-signed") {
    RubricSet set = builders::set(
        "rates", {item("E", Tier::kEssential, 1.0),
                  item("I", Tier::kImportant, 1.0),
                  item("P", Tier::kPitfall, 1.0)});
    const GradeSheet grades = builders::sheet(set, {1.0, 0.5, 0.5});
    const ScoreBreakdown before = weighted_score(set, grades, ScoringConfig{});
    CHECK(before.rates.at(Tier::kPitfall) == doctest::Approx(-0.5));
    CHECK(before.rates.at(Tier::kHighlight) == 0.0);

    // Doubling every weight within a tier leaves its rate unchanged.
    for (auto& item : set.items) item.weight *= 2.0;
    const ScoreBreakdown after = weighted_score(set, grades, ScoringConfig{});
    for (const Tier t : {Tier::kEssential, Tier::kImportant, Tier::kHighlight,
                         Tier::kPitfall}) {
        CHECK(after.rates.at(t) == doctest::Approx(before.rates.at(t)));
    }
}

TEST_CASE("ablation suite orders its four columns on a triggering input") {
    const RubricSet set = builders::set(
        "abl", {item("E", Tier::kEssential, 2.0),
                item("I one", Tier::kImportant, 2.0, CapabilityTag::kSafety),
                item("I two", Tier::kImportant, 2.0, CapabilityTag::kSafety),
                item("H", Tier::kHighlight, 1.0, CapabilityTag::kSafety),
                item("P", Tier::kPitfall, 1.0)});
    // Low essential, saturated safety bucket, tripped pitfall ceiling.
    const GradeSheet grades = builders::sheet(set, {0.5, 1.0, 1.0, 1.0, 1.0});
    const AblationScores scores = ablation_suite(set, grades, ScoringConfig{});
    CHECK(scores.with_saturation <= scores.base);
    CHECK(scores.with_truncation <= scores.base);
    CHECK(scores.with_both <=
          std::min(scores.with_saturation, scores.with_truncation));
    CHECK(scores.with_truncation < scores.base);  // gate actually tripped

    // A perfect response triggers nothing; all four columns coincide...
    const RubricSet calm = builders::set(
        "calm", {item("E", Tier::kEssential, 2.0),
                 item("I", Tier::kImportant, 1.0),
                 item("H", Tier::kHighlight, 1.0),
                 item("P", Tier::kPitfall, 1.0)});
    const GradeSheet perfect = builders::sheet(calm, {1.0, 1.0, 1.0, 0.0});
    const AblationScores flat = ablation_suite(calm, perfect, ScoringConfig{});
    CHECK(flat.base == flat.with_saturation);
    CHECK(flat.base == flat.with_truncation);
    CHECK(flat.base == flat.with_both);
}

TEST_CASE("scoring config validation rejects off-range knobs") {
    ScoringConfig config;
    config.tier_weights[Tier::kImportant] = 0.0;
    CHECK_THROWS_AS(validate_config(config), InvalidConfig);

    config = ScoringConfig{};
    config.ratio_essential = 0.0;
    CHECK_THROWS_AS(validate_config(config), InvalidConfig);

    config = ScoringConfig{};
    config.ratio_pitfall = 1.5;
    CHECK_THROWS_AS(validate_config(config), InvalidConfig);

    config = ScoringConfig{};
    config.saturation_cap = -1.0;
    CHECK_THROWS_AS(validate_config(config), InvalidConfig);

    config = ScoringConfig{};
    config.essential_multiplier = 0.0;
    CHECK_THROWS_AS(validate_config(config), InvalidConfig);

    CHECK_NOTHROW(validate_config(ScoringConfig{}));
}

TEST_CASE("scoring config serializes and re-parses unchanged") {
    ScoringConfig config;
    config.tier_weights[Tier::kEssential] = 3.0;
    config.truncation_enabled = true;
    config.ratio_essential = 0.6;
    config.saturation_enabled = true;
    config.saturation_cap = 2.5;
    const ScoringConfig round =
        parse_scoring_config(scoring_config_to_json(config));
    CHECK(round == config);
    CHECK(parse_scoring_config("{}") == ScoringConfig{});
    CHECK_THROWS_AS(parse_scoring_config("{\"ratio_essential\": 2.0}"),
                    InvalidConfig);
}

TEST_CASE("breakdown serialization carries every tier") {
    const RubricSet set = builders::set(
        "json", {item("E", Tier::kEssential, 1.0),
                 item("P", Tier::kPitfall, 0.5)});
    const GradeSheet grades = builders::sheet(set, {1.0, 0.5});
    const std::string doc =
        breakdown_to_json(weighted_score(set, grades, ScoringConfig{}));
    for (const char* needle :
         {"\"overall\"", "\"truncated\"", "\"saturation_clip\"", "\"totals\"",
          "\"rates\"", "\"Essential\"", "\"Important\"", "\"Highlight\"",
          "\"Pitfall\""}) {
        CHECK(doc.find(needle) != std::string::npos);
    }
}

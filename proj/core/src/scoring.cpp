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

#include "rubriceval/scoring.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "internal.hpp"
#include "rubriceval/errors.hpp"

namespace rubriceval {

namespace {

using internal::njson;

constexpr Tier kAllTiers[] = {Tier::kEssential, Tier::kImportant,
                              Tier::kHighlight, Tier::kPitfall};

TierTotals tier_or_zero(const std::map<Tier, TierTotals>& totals, Tier t) {
    const auto it = totals.find(t);
    return it == totals.end() ? TierTotals{} : it->second;
}

// Shared accumulation for base and weighted scores. Identical ordering keeps
// the unit-weight weighted score bit-equal to the base score.
double normalized_ratio(const std::map<Tier, TierTotals>& totals,
                        const std::map<Tier, double>& weights) {
    double numerator = 0.0;
    double denominator = 0.0;
    for (const Tier t : {Tier::kEssential, Tier::kImportant, Tier::kHighlight}) {
        const TierTotals tt = tier_or_zero(totals, t);
        const double w = weights.at(t);
        numerator += w * tt.raw;
        denominator += w * tt.capacity;
    }
    const TierTotals pit = tier_or_zero(totals, Tier::kPitfall);
    const double wp = weights.at(Tier::kPitfall);
    numerator -= wp * pit.raw;
    denominator -= wp * pit.capacity;
    if (denominator <= 0.0) {
        throw DegenerateDenominator(denominator);
    }
    return numerator / denominator;
}

const std::map<Tier, double>& unit_weights() {
    static const std::map<Tier, double> kUnit = {
        {Tier::kEssential, 1.0},
        {Tier::kImportant, 1.0},
        {Tier::kHighlight, 1.0},
        {Tier::kPitfall, 1.0},
    };
    return kUnit;
}

bool truncation_triggered(const std::map<Tier, TierTotals>& totals,
                          const ScoringConfig& config) {
    const TierTotals essential = tier_or_zero(totals, Tier::kEssential);
    const TierTotals pitfall = tier_or_zero(totals, Tier::kPitfall);
    // Strict comparisons: landing exactly on the floor/ceiling passes.
    return essential.raw < config.ratio_essential * essential.capacity ||
           pitfall.raw > config.ratio_pitfall * pitfall.capacity;
}

std::map<Tier, double> parse_weight_spec(const std::string& spec,
                                         const std::string& context) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ':')) {
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (token.empty() || end != token.c_str() + token.size()) {
            throw InvalidConfig(context + ": bad weight component \"" + token + "\"");
        }
        parts.push_back(v);
    }
    if (parts.size() != 4) {
        throw InvalidConfig(context + ": weight spec needs E:I:H:P, got \"" +
                            spec + "\"");
    }
    return {{Tier::kEssential, parts[0]},
            {Tier::kImportant, parts[1]},
            {Tier::kHighlight, parts[2]},
            {Tier::kPitfall, parts[3]}};
}

}  // namespace

void validate_config(const ScoringConfig& config) {
    for (const Tier t : kAllTiers) {
        const auto it = config.tier_weights.find(t);
        if (it == config.tier_weights.end()) {
            throw InvalidConfig("tier_weights must cover all four tiers");
        }
        if (!(it->second > 0.0)) {
            throw InvalidConfig("tier weight for " + to_string(t) +
                                " must be positive");
        }
    }
    if (!(config.ratio_essential > 0.0) || config.ratio_essential > 1.0) {
        throw InvalidConfig("ratio_essential must lie in (0, 1]");
    }
    if (!(config.ratio_pitfall > 0.0) || config.ratio_pitfall > 1.0) {
        throw InvalidConfig("ratio_pitfall must lie in (0, 1]");
    }
    if (!(config.saturation_cap > 0.0)) {
        throw InvalidConfig("saturation_cap must be positive");
    }
    if (!(config.essential_multiplier > 0.0)) {
        throw InvalidConfig("essential_multiplier must be positive");
    }
}

std::map<Tier, TierTotals> raw_dimension_scores(const RubricSet& set,
                                                const GradeSheet& grades) {
    if (set.items.size() != grades.grades.size()) {
        throw GradeMismatch("sheet grades " + std::to_string(grades.grades.size()) +
                            " items, set has " + std::to_string(set.items.size()));
    }
    std::map<Tier, TierTotals> totals;
    for (const Tier t : kAllTiers) {
        totals[t] = TierTotals{};
    }
    for (const auto& item : set.items) {
        const auto it = grades.grades.find(item.title);
        if (it == grades.grades.end()) {
            throw GradeMismatch("no grade for item \"" + item.title + "\"");
        }
        totals[item.tier].raw += it->second * item.weight;
        totals[item.tier].capacity += item.weight;
    }
    return totals;
}

double base_score(const RubricSet& set, const GradeSheet& grades) {
    return normalized_ratio(raw_dimension_scores(set, grades), unit_weights());
}

std::map<Tier, TierTotals> apply_truncation(
    const std::map<Tier, TierTotals>& totals, const ScoringConfig& config) {
    std::map<Tier, TierTotals> adjusted = totals;
    for (const Tier t : kAllTiers) {
        adjusted.emplace(t, TierTotals{});  // ensure presence, keep values
    }
    if (truncation_triggered(totals, config)) {
        adjusted[Tier::kImportant].raw = 0.0;
        adjusted[Tier::kHighlight].raw = 0.0;
    }
    return adjusted;
}

SaturationOutcome apply_saturation(const RubricSet& set,
                                   const GradeSheet& grades,
                                   const std::map<Tier, TierTotals>& totals,
                                   const ScoringConfig& config) {
    SaturationOutcome outcome;
    outcome.totals = totals;
    for (const Tier t : kAllTiers) {
        outcome.totals.emplace(t, TierTotals{});
    }

    // Rescale per-item contributions so upstream adjustments (zeroed tier
    // raws from truncation) survive: adjusted_raw / fresh_raw is 1 when
    // nothing changed and 0 when the tier was zeroed.
    std::map<Tier, double> fresh;
    for (const auto& item : set.items) {
        if (item.tier != Tier::kImportant && item.tier != Tier::kHighlight) continue;
        fresh[item.tier] += grades.grades.at(item.title) * item.weight;
    }
    const auto scale_for = [&](Tier t) {
        const double f = fresh[t];
        return f > 0.0 ? tier_or_zero(totals, t).raw / f : 1.0;
    };
    const double scale_imp = scale_for(Tier::kImportant);
    const double scale_high = scale_for(Tier::kHighlight);

    // Bucket by capability tag; untagged items share one bucket (nullopt,
    // which orders first in the map).
    std::map<std::optional<CapabilityTag>, double> buckets;
    double pre_imp = 0.0;
    double pre_high = 0.0;
    for (const auto& item : set.items) {
        if (item.tier != Tier::kImportant && item.tier != Tier::kHighlight) continue;
        const double scale =
            item.tier == Tier::kImportant ? scale_imp : scale_high;
        const double contribution = grades.grades.at(item.title) * item.weight * scale;
        buckets[item.tag] += contribution;
        (item.tier == Tier::kImportant ? pre_imp : pre_high) += contribution;
    }

    // Summing capped and uncapped buckets in the same order keeps
    // capped <= pre under floating point, so the clip is never negative.
    double pre = 0.0;
    double capped = 0.0;
    for (const auto& [tag, sum] : buckets) {
        pre += sum;
        capped += std::min(sum, config.saturation_cap);
    }
    const double essential_allowance =
        config.essential_multiplier * tier_or_zero(totals, Tier::kEssential).raw;
    const double combined = std::min(capped, essential_allowance);

    if (combined < pre) {
        outcome.clip = pre - combined;
        // Split the combined mass back over the two tiers in proportion to
        // their pre-saturation contributions.
        const double imp_share = pre > 0.0 ? pre_imp / pre : 0.0;
        const double high_share = pre > 0.0 ? pre_high / pre : 0.0;
        outcome.totals[Tier::kImportant].raw = combined * imp_share;
        outcome.totals[Tier::kHighlight].raw = combined * high_share;
    } else {
        outcome.clip = 0.0;  // nothing exceeded a cap; raws pass through
    }
    return outcome;
}

ScoreBreakdown weighted_score(const RubricSet& set, const GradeSheet& grades,
                              const ScoringConfig& config) {
    validate_config(config);
    ScoreBreakdown breakdown;
    breakdown.config = config;
    breakdown.totals = raw_dimension_scores(set, grades);

    std::map<Tier, TierTotals> adjusted = breakdown.totals;
    if (config.truncation_enabled) {
        breakdown.truncated = truncation_triggered(adjusted, config);
        adjusted = apply_truncation(adjusted, config);
    }
    if (config.saturation_enabled) {
        SaturationOutcome outcome = apply_saturation(set, grades, adjusted, config);
        adjusted = std::move(outcome.totals);
        breakdown.saturation_clip = outcome.clip;
    }
    breakdown.overall = normalized_ratio(adjusted, config.tier_weights);

    for (const Tier t : kAllTiers) {
        const TierTotals tt = breakdown.totals.at(t);
        double rate = tt.capacity > 0.0 ? tt.raw / tt.capacity : 0.0;
        if (t == Tier::kPitfall) rate = -rate;
        breakdown.rates[t] = rate;
    }
    return breakdown;
}

AblationScores ablation_suite(const RubricSet& set, const GradeSheet& grades,
                              const ScoringConfig& config) {
    AblationScores scores;
    ScoringConfig variant = config;
    variant.truncation_enabled = false;
    variant.saturation_enabled = false;
    scores.base = weighted_score(set, grades, variant).overall;
    variant.saturation_enabled = true;
    scores.with_saturation = weighted_score(set, grades, variant).overall;
    variant.truncation_enabled = true;
    variant.saturation_enabled = false;
    scores.with_truncation = weighted_score(set, grades, variant).overall;
    variant.saturation_enabled = true;
    scores.with_both = weighted_score(set, grades, variant).overall;
    return scores;
}

std::string breakdown_to_json(const ScoreBreakdown& breakdown) {
    njson doc;
    doc["overall"] = breakdown.overall;
    doc["truncated"] = breakdown.truncated;
    doc["saturation_clip"] = breakdown.saturation_clip;
    njson totals;
    njson rates;
    for (const Tier t : kAllTiers) {
        const TierTotals tt = tier_or_zero(breakdown.totals, t);
        totals[to_string(t)] = {{"raw", tt.raw}, {"capacity", tt.capacity}};
        const auto it = breakdown.rates.find(t);
        rates[to_string(t)] = it == breakdown.rates.end() ? 0.0 : it->second;
    }
    doc["totals"] = std::move(totals);
    doc["rates"] = std::move(rates);
    doc["config"] = njson::parse(scoring_config_to_json(breakdown.config));
    return doc.dump(2) + "\n";
}

std::string ablation_to_json(const AblationScores& scores) {
    njson doc;
    doc["base"] = scores.base;
    doc["with_saturation"] = scores.with_saturation;
    doc["with_truncation"] = scores.with_truncation;
    doc["with_both"] = scores.with_both;
    return doc.dump(2) + "\n";
}

std::string scoring_config_to_json(const ScoringConfig& config) {
    njson doc;
    njson weights;
    for (const Tier t : kAllTiers) {
        weights[to_string(t)] = config.tier_weights.at(t);
    }
    doc["tier_weights"] = std::move(weights);
    doc["truncation_enabled"] = config.truncation_enabled;
    doc["ratio_essential"] = config.ratio_essential;
    doc["ratio_pitfall"] = config.ratio_pitfall;
    doc["saturation_enabled"] = config.saturation_enabled;
    doc["saturation_cap"] = config.saturation_cap;
    doc["essential_multiplier"] = config.essential_multiplier;
    return doc.dump(2) + "\n";
}

ScoringConfig parse_scoring_config(const std::string& document_json) {
    njson doc;
    try {
        doc = njson::parse(document_json);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("/", "scoring config must be an object");
    }
    ScoringConfig config;
    if (doc.contains("tier_weights")) {
        const njson& weights = doc["tier_weights"];
        if (weights.is_string()) {
            config.tier_weights =
                parse_weight_spec(weights.get<std::string>(), "tier_weights");
        } else if (weights.is_object()) {
            for (const auto& [key, value] : weights.items()) {
                const auto tier = tier_from_string(key);
                if (!tier || !value.is_number()) {
                    throw SchemaViolation("/tier_weights/" + key,
                                          "expected tier name -> number");
                }
                config.tier_weights[*tier] = value.get<double>();
            }
        } else {
            throw SchemaViolation("/tier_weights",
                                  "expected an object or an E:I:H:P string");
        }
    }
    config.truncation_enabled =
        doc.value("truncation_enabled", config.truncation_enabled);
    config.ratio_essential = doc.value("ratio_essential", config.ratio_essential);
    config.ratio_pitfall = doc.value("ratio_pitfall", config.ratio_pitfall);
    config.saturation_enabled =
        doc.value("saturation_enabled", config.saturation_enabled);
    config.saturation_cap = doc.value("saturation_cap", config.saturation_cap);
    config.essential_multiplier =
        doc.value("essential_multiplier", config.essential_multiplier);
    validate_config(config);
    return config;
}

}  // namespace rubriceval

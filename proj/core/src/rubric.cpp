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

#include "rubriceval/rubric.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>

#include "internal.hpp"
#include "rubriceval/errors.hpp"

namespace rubriceval {

namespace {

using internal::normalize_key;

const std::array<std::string, 4> kTierNames = {"Essential", "Important",
                                               "Highlight", "Pitfall"};

const std::array<std::string, 9> kTagNames = {
    "Information Quality", "Evidence Support",   "Safety",
    "Readability",         "Humanistic Care",    "Intent Recognition",
    "Short-term Memory",   "Risk Control",       "Contextual Coreference"};

const std::array<std::string, 3> kDifficultyNames = {"Basic", "Pro", "Expert"};
const std::array<std::string, 3> kPerspectiveNames = {"Direct", "Depth",
                                                      "Breadth"};

// Canonical grade-level keys, positive ladder then pitfall ladder.
const std::array<std::string, 3> kMetKeys = {"Not Met", "Partially Met",
                                             "Fully Met"};
const std::array<std::string, 3> kErrorKeys = {"No Error", "Minor Error",
                                               "Major Error"};

const std::unordered_map<std::string, Tier>& tier_aliases() {
    static const std::unordered_map<std::string, Tier> kMap = {
        {"essential", Tier::kEssential},  {"necessary", Tier::kEssential},
        {"important", Tier::kImportant},  {"highlight", Tier::kHighlight},
        {"pitfall", Tier::kPitfall},      {"pitful", Tier::kPitfall},
        {"pit", Tier::kPitfall},
    };
    return kMap;
}

const std::unordered_map<std::string, CapabilityTag>& tag_aliases() {
    static const std::unordered_map<std::string, CapabilityTag> kMap = {
        {"informationquality", CapabilityTag::kInformationQuality},
        {"infoqual", CapabilityTag::kInformationQuality},
        {"evidencesupport", CapabilityTag::kEvidenceSupport},
        {"evidentiarysupport", CapabilityTag::kEvidenceSupport},
        {"evidensup", CapabilityTag::kEvidenceSupport},
        {"safety", CapabilityTag::kSafety},
        {"readability", CapabilityTag::kReadability},
        {"read", CapabilityTag::kReadability},
        {"humanisticcare", CapabilityTag::kHumanisticCare},
        {"humancare", CapabilityTag::kHumanisticCare},
        {"humcare", CapabilityTag::kHumanisticCare},
        {"intentrecognition", CapabilityTag::kIntentRecognition},
        {"preciseintentrecognition", CapabilityTag::kIntentRecognition},
        {"shorttermmemory", CapabilityTag::kShortTermMemory},
        {"riskcontrol", CapabilityTag::kRiskControl},
        {"contextualcoreference", CapabilityTag::kContextualCoreference},
    };
    return kMap;
}

const std::unordered_map<std::string, GradeLevel>& level_aliases() {
    static const std::unordered_map<std::string, GradeLevel> kMap = {
        // Positive ladder.
        {"notmet", GradeLevel::kNotMet},
        {"didnotmeetstandard", GradeLevel::kNotMet},
        {"partiallymet", GradeLevel::kPartiallyMet},
        {"partiallymetstandard", GradeLevel::kPartiallyMet},
        {"partialmet", GradeLevel::kPartiallyMet},
        {"fullymet", GradeLevel::kFullyMet},
        {"fullymetstandard", GradeLevel::kFullyMet},
        // Pitfall ladder; includes mangled variants seen in the wild.
        {"noerror", GradeLevel::kNotMet},
        {"didnotcommiterror", GradeLevel::kNotMet},
        {"nopitful", GradeLevel::kNotMet},
        {"nopitul", GradeLevel::kNotMet},
        {"nopitful", GradeLevel::kNotMet},
        {"minorerror", GradeLevel::kPartiallyMet},
        {"majorerror", GradeLevel::kFullyMet},
    };
    return kMap;
}

}  // namespace

const std::string& to_string(Tier t) {
    return kTierNames[static_cast<std::size_t>(t)];
}

const std::string& to_string(CapabilityTag t) {
    return kTagNames[static_cast<std::size_t>(t)];
}

const std::string& to_string(DifficultyLabel d) {
    return kDifficultyNames[static_cast<std::size_t>(d)];
}

const std::string& to_string(PerspectiveLabel p) {
    return kPerspectiveNames[static_cast<std::size_t>(p)];
}

const std::string& level_key(Tier tier, GradeLevel level) {
    const auto idx = static_cast<std::size_t>(level);
    return tier == Tier::kPitfall ? kErrorKeys[idx] : kMetKeys[idx];
}

std::optional<Tier> tier_from_string(const std::string& label) {
    const auto& map = tier_aliases();
    const auto it = map.find(normalize_key(label));
    if (it == map.end()) return std::nullopt;
    return it->second;
}

std::optional<CapabilityTag> capability_tag_from_string(const std::string& label) {
    const auto& map = tag_aliases();
    const auto it = map.find(normalize_key(label));
    if (it == map.end()) return std::nullopt;
    return it->second;
}

std::optional<DifficultyLabel> difficulty_from_string(const std::string& label) {
    const std::string key = normalize_key(label);
    for (std::size_t i = 0; i < kDifficultyNames.size(); ++i) {
        if (key == normalize_key(kDifficultyNames[i])) {
            return static_cast<DifficultyLabel>(i);
        }
    }
    return std::nullopt;
}

std::optional<PerspectiveLabel> perspective_from_string(const std::string& label) {
    const std::string key = normalize_key(label);
    for (std::size_t i = 0; i < kPerspectiveNames.size(); ++i) {
        if (key == normalize_key(kPerspectiveNames[i])) {
            return static_cast<PerspectiveLabel>(i);
        }
    }
    return std::nullopt;
}

std::optional<GradeLevel> grade_level_from_string(const std::string& label) {
    const auto& map = level_aliases();
    const auto it = map.find(normalize_key(label));
    if (it == map.end()) return std::nullopt;
    return it->second;
}

std::vector<const RubricItem*> RubricSet::items_in_tier(Tier t) const {
    std::vector<const RubricItem*> out;
    for (const auto& item : items) {
        if (item.tier == t) out.push_back(&item);
    }
    return out;
}

const RubricItem* RubricSet::find_item(const std::string& title) const {
    for (const auto& item : items) {
        if (item.title == title) return &item;
    }
    return nullptr;
}

Grade normalize_grade(double raw_judge_value) {
    if (raw_judge_value < 0.0 || raw_judge_value > 2.0) {
        throw OutOfRangeGrade("<grade>", raw_judge_value);
    }
    return raw_judge_value / 2.0;
}

const std::string& to_string(ValidationIssueKind k) {
    static const std::array<std::string, 11> kNames = {
        "EmptySet",          "TooFewItems",       "TooManyItems",
        "DuplicateTitle",    "NonPositiveWeight", "WrongDescriptionLevels",
        "TagNotAllowedForTier", "TooFewEssential", "MissingImportant",
        "MissingHighlight",  "TooManyPitfall"};
    return kNames[static_cast<std::size_t>(k)];
}

std::vector<ValidationIssue> validate_rubric_set(const RubricSet& set,
                                                 ValidationMode mode) {
    std::vector<ValidationIssue> issues;
    const auto add = [&issues](ValidationIssueKind kind, std::string detail) {
        issues.push_back({kind, std::move(detail)});
    };

    if (set.items.empty()) {
        add(ValidationIssueKind::kEmptySet, "rubric set has no items");
        return issues;
    }

    std::set<std::string> seen;
    std::map<Tier, std::size_t> per_tier;
    for (const auto& item : set.items) {
        if (!seen.insert(item.title).second) {
            add(ValidationIssueKind::kDuplicateTitle,
                "duplicate title \"" + item.title + "\"");
        }
        if (!(item.weight > 0.0)) {
            add(ValidationIssueKind::kNonPositiveWeight,
                "item \"" + item.title + "\" has non-positive weight");
        }
        const bool has_all_levels =
            item.descriptions.size() == 3 &&
            item.descriptions.count(GradeLevel::kNotMet) &&
            item.descriptions.count(GradeLevel::kPartiallyMet) &&
            item.descriptions.count(GradeLevel::kFullyMet);
        if (!has_all_levels) {
            add(ValidationIssueKind::kWrongDescriptionLevels,
                "item \"" + item.title + "\" lacks the three grade levels");
        }
        if (item.tag.has_value() && (item.tier == Tier::kEssential ||
                                     item.tier == Tier::kPitfall)) {
            add(ValidationIssueKind::kTagNotAllowedForTier,
                "item \"" + item.title + "\" carries a tag on tier " +
                    to_string(item.tier));
        }
        ++per_tier[item.tier];
    }

    if (mode == ValidationMode::kStrict) {
        if (set.items.size() < 5) {
            add(ValidationIssueKind::kTooFewItems,
                "set has " + std::to_string(set.items.size()) +
                    " items, minimum is 5");
        }
        if (set.items.size() > 15) {
            add(ValidationIssueKind::kTooManyItems,
                "set has " + std::to_string(set.items.size()) +
                    " items, maximum is 15");
        }
        if (per_tier[Tier::kEssential] < 2) {
            add(ValidationIssueKind::kTooFewEssential,
                "set has " + std::to_string(per_tier[Tier::kEssential]) +
                    " Essential items, minimum is 2");
        }
        if (per_tier[Tier::kImportant] < 1) {
            add(ValidationIssueKind::kMissingImportant,
                "set has no Important item");
        }
        if (per_tier[Tier::kHighlight] < 1) {
            add(ValidationIssueKind::kMissingHighlight,
                "set has no Highlight item");
        }
        if (per_tier[Tier::kPitfall] > 2) {
            add(ValidationIssueKind::kTooManyPitfall,
                "set has " + std::to_string(per_tier[Tier::kPitfall]) +
                    " Pitfall items, maximum is 2");
        }
    }
    return issues;
}

}  // namespace rubriceval

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

#ifndef RUBRICEVAL_RUBRIC_HPP_
#define RUBRICEVAL_RUBRIC_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rubriceval {

// Scoring dimension of a rubric item. Pitfall is deductive; the other three
// are additive. Weights are stored as positive magnitudes for all tiers and
// the sign is applied at scoring time.
enum class Tier { kEssential, kImportant, kHighlight, kPitfall };

// Closed set of capability tags an Important/Highlight item may carry.
enum class CapabilityTag {
    kInformationQuality,
    kEvidenceSupport,
    kSafety,
    kReadability,
    kHumanisticCare,
    kIntentRecognition,
    kShortTermMemory,
    kRiskControl,
    kContextualCoreference,
};

enum class DifficultyLabel { kBasic, kPro, kExpert };
enum class PerspectiveLabel { kDirect, kDepth, kBreadth };

// Grade level keys of the three-step description ladder. Positive tiers use
// the Met ladder, Pitfall uses the Error ladder.
enum class GradeLevel { kNotMet, kPartiallyMet, kFullyMet };

const std::string& to_string(Tier t);
const std::string& to_string(CapabilityTag t);
const std::string& to_string(DifficultyLabel d);
const std::string& to_string(PerspectiveLabel p);

// Canonical serialized key for a grade level given the item tier, e.g.
// (kPitfall, kPartiallyMet) -> "Minor Error".
const std::string& level_key(Tier tier, GradeLevel level);

// Alias-tolerant lookups. Matching is case-insensitive and ignores
// non-alphanumeric characters. Returns nullopt for unknown labels.
std::optional<Tier> tier_from_string(const std::string& label);
std::optional<CapabilityTag> capability_tag_from_string(const std::string& label);
std::optional<DifficultyLabel> difficulty_from_string(const std::string& label);
std::optional<PerspectiveLabel> perspective_from_string(const std::string& label);
std::optional<GradeLevel> grade_level_from_string(const std::string& label);

// One criterion of a rubric. `descriptions` holds exactly three entries, one
// per GradeLevel, with the per-level standards text.
struct RubricItem {
    std::string title;
    Tier tier = Tier::kEssential;
    double weight = 1.0;  // positive magnitude, tier supplies the sign
    std::map<GradeLevel, std::string> descriptions;
    std::optional<CapabilityTag> tag;
    std::optional<DifficultyLabel> difficulty;
    std::optional<PerspectiveLabel> perspective;

    bool operator==(const RubricItem&) const = default;
};

// A complete rubric for one query. Items keep document order: Essential
// first, then Important, Highlight, Pitfall, preserving in-tier order.
struct RubricSet {
    std::string query;
    std::string query_id;  // optional; empty when the document carries none
    std::vector<RubricItem> items;
    // Free-form origin metadata (department, generator, iteration, ...).
    std::map<std::string, std::string> provenance;

    bool operator==(const RubricSet&) const = default;

    std::vector<const RubricItem*> items_in_tier(Tier t) const;
    const RubricItem* find_item(const std::string& title) const;
};

// Normalized grade for one item: 0, 0.5 or 1 of the item's weight earned
// (for Pitfall: severity of the committed error).
using Grade = double;

// Grades for every item of one rubric set, produced by a judge pass.
struct GradeSheet {
    std::string query_id;
    std::string response_id;
    std::string model_name;
    std::string judge_name;
    long long response_length = 0;  // word count of the graded response
    std::map<std::string, Grade> grades;  // item title -> normalized grade

    bool operator==(const GradeSheet&) const = default;
};

// Normalizes a raw judge grade on the 0/1/2 scale to the canonical
// {0, 0.5, 1} domain. Values outside [0, 2] throw OutOfRangeGrade; fractional
// raw values are accepted and halved.
Grade normalize_grade(double raw_judge_value);

enum class ValidationIssueKind {
    kEmptySet,
    kTooFewItems,       // strict: fewer than 5 items
    kTooManyItems,      // strict: more than 15 items
    kDuplicateTitle,
    kNonPositiveWeight,
    kWrongDescriptionLevels,
    kTagNotAllowedForTier,
    kTooFewEssential,   // strict: fewer than 2
    kMissingImportant,  // strict
    kMissingHighlight,  // strict
    kTooManyPitfall,    // strict: more than 2
};

struct ValidationIssue {
    ValidationIssueKind kind;
    std::string detail;  // human-readable, names the offending item when any

    bool operator==(const ValidationIssue&) const = default;
};

const std::string& to_string(ValidationIssueKind k);

enum class ValidationMode { kLenient, kStrict };

// Checks set invariants and returns every violation found (empty means
// valid). Lenient mode checks structure only; strict mode additionally
// enforces the 5-15 size bound and the per-tier count limits that
// generator-compliant documents satisfy.
std::vector<ValidationIssue> validate_rubric_set(
    const RubricSet& set, ValidationMode mode = ValidationMode::kLenient);

}  // namespace rubriceval

#endif  // RUBRICEVAL_RUBRIC_HPP_

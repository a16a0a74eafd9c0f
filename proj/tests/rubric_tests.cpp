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

#include "builders.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/rubric.hpp"
#include "rubriceval/rubric_io.hpp"
#include "test_util.hpp"

using namespace rubriceval;

namespace {

bool has_issue(const std::vector<ValidationIssue>& issues,
               ValidationIssueKind kind) {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.kind == kind; });
}

}  // namespace

TEST_CASE("enum labels round-trip through to_string/from_string") {
    for (const Tier t : {Tier::kEssential, Tier::kImportant, Tier::kHighlight,
                         Tier::kPitfall}) {
        CHECK(tier_from_string(to_string(t)) == t);
    }
    for (int i = 0; i < 9; ++i) {
        const auto tag = static_cast<CapabilityTag>(i);
        CHECK(capability_tag_from_string(to_string(tag)) == tag);
    }
    for (const DifficultyLabel d :
         {DifficultyLabel::kBasic, DifficultyLabel::kPro,
          DifficultyLabel::kExpert}) {
        CHECK(difficulty_from_string(to_string(d)) == d);
    }
    for (const PerspectiveLabel p :
         {PerspectiveLabel::kDirect, PerspectiveLabel::kDepth,
          PerspectiveLabel::kBreadth}) {
        CHECK(perspective_from_string(to_string(p)) == p);
    }
}

TEST_CASE("tier parsing tolerates casing and the Pitful misspelling") {
    CHECK(tier_from_string("ESSENTIAL") == Tier::kEssential);
    CHECK(tier_from_string("pitfall") == Tier::kPitfall);
    CHECK(tier_from_string("Pitful") == Tier::kPitfall);
    CHECK(tier_from_string("High light") == Tier::kHighlight);
    CHECK_FALSE(tier_from_string("unknown tier").has_value());
}

TEST_CASE("grade level keys differ between positive tiers and pitfalls") {
    CHECK(level_key(Tier::kEssential, GradeLevel::kNotMet) == "Not Met");
    CHECK(level_key(Tier::kEssential, GradeLevel::kPartiallyMet) ==
          "Partially Met");
    CHECK(level_key(Tier::kEssential, GradeLevel::kFullyMet) == "Fully Met");
    CHECK(level_key(Tier::kPitfall, GradeLevel::kNotMet) == "No Error");
    CHECK(level_key(Tier::kPitfall, GradeLevel::kPartiallyMet) ==
          "Minor Error");
    CHECK(level_key(Tier::kPitfall, GradeLevel::kFullyMet) == "Major Error");
}

TEST_CASE("grade level parsing accepts corrupted pitfall spellings") {
    CHECK(grade_level_from_string("Not Met") == GradeLevel::kNotMet);
    CHECK(grade_level_from_string("No Error") == GradeLevel::kNotMet);
    CHECK(grade_level_from_string("No Pitu l") == GradeLevel::kNotMet);
    CHECK(grade_level_from_string("No Pitfu l") == GradeLevel::kNotMet);
    CHECK(grade_level_from_string("Minor Error") == GradeLevel::kPartiallyMet);
    CHECK(grade_level_from_string("MAJOR ERROR") == GradeLevel::kFullyMet);
    CHECK_FALSE(grade_level_from_string("sort of met").has_value());
}

TEST_CASE("normalize_grade halves the raw 0/1/2 judge scale") {
    CHECK(normalize_grade(0.0) == 0.0);
    CHECK(normalize_grade(1.0) == 0.5);
    CHECK(normalize_grade(2.0) == 1.0);
    CHECK_THROWS_AS(normalize_grade(-0.1), OutOfRangeGrade);
    CHECK_THROWS_AS(normalize_grade(2.5), OutOfRangeGrade);
}

TEST_CASE("bundled wrapped document parses with signed pitfall weights") {
    const RubricSet set =
        load_rubric_set(testutil::data_path("rubrics/enteric_capsules.json"));
    CHECK(set.items.size() == 8);
    CHECK(set.items_in_tier(Tier::kEssential).size() == 4);
    CHECK(set.items_in_tier(Tier::kImportant).size() == 1);
    CHECK(set.items_in_tier(Tier::kHighlight).size() == 1);
    CHECK(set.items_in_tier(Tier::kPitfall).size() == 2);
    CHECK(set.provenance.count("Department") == 1);
    // Pitfall weights are stored as positive magnitudes even when the
    // document writes them as -2.
    for (const RubricItem* item : set.items_in_tier(Tier::kPitfall)) {
        CHECK(item->weight == 2.0);
        CHECK(item->descriptions.count(GradeLevel::kFullyMet) == 1);
    }
    CHECK(validate_rubric_set(set, ValidationMode::kStrict).empty());
}

TEST_CASE("bundled flat document fills weight defaults") {
    const RubricSet set =
        load_rubric_set(testutil::data_path("rubrics/muscle_relaxant.json"));
    CHECK(set.items_in_tier(Tier::kEssential).size() == 2);
    CHECK(set.items_in_tier(Tier::kImportant).size() == 3);
    CHECK(set.items_in_tier(Tier::kHighlight).size() == 3);
    CHECK(set.items_in_tier(Tier::kPitfall).size() == 2);
    for (const auto& item : set.items) {
        const double expected = item.tier == Tier::kPitfall ? 2.0 : 1.0;
        CHECK(item.weight == expected);
        // The corrupted "No Pitu l" / "No Pitfu l" level keys still land on
        // the Not Met slot.
        CHECK(item.descriptions.size() == 3);
    }
    CHECK(validate_rubric_set(set).empty());
}

TEST_CASE("document without a highlight tier passes lenient, fails strict") {
    const RubricSet set =
        load_rubric_set(testutil::data_path("rubrics/mole_evaluation.json"));
    CHECK(validate_rubric_set(set, ValidationMode::kLenient).empty());
    const auto strict = validate_rubric_set(set, ValidationMode::kStrict);
    CHECK(has_issue(strict, ValidationIssueKind::kMissingHighlight));
}

TEST_CASE("validation flags structural defects") {
    RubricSet empty;
    empty.query = "q";
    CHECK(has_issue(validate_rubric_set(empty), ValidationIssueKind::kEmptySet));

    RubricSet dup = builders::set(
        "dup", {builders::item("Same title", Tier::kEssential, 1.0),
                builders::item("Same title", Tier::kImportant, 1.0)});
    CHECK(has_issue(validate_rubric_set(dup),
                    ValidationIssueKind::kDuplicateTitle));

    RubricSet zero = builders::set(
        "zero", {builders::item("Zero weight", Tier::kEssential, 0.0)});
    CHECK(has_issue(validate_rubric_set(zero),
                    ValidationIssueKind::kNonPositiveWeight));

    RubricSet levels = builders::set(
        "levels", {builders::item("Partial levels", Tier::kEssential, 1.0)});
    levels.items[0].descriptions.erase(GradeLevel::kPartiallyMet);
    CHECK(has_issue(validate_rubric_set(levels),
                    ValidationIssueKind::kWrongDescriptionLevels));
}

TEST_CASE("strict validation enforces the tier composition rules") {
    RubricSet thin = builders::set(
        "thin", {builders::item("Sole essential", Tier::kEssential, 1.0),
                 builders::item("Sole important", Tier::kImportant, 1.0)});
    const auto issues = validate_rubric_set(thin, ValidationMode::kStrict);
    CHECK(has_issue(issues, ValidationIssueKind::kTooFewItems));
    CHECK(has_issue(issues, ValidationIssueKind::kTooFewEssential));
    CHECK(has_issue(issues, ValidationIssueKind::kMissingHighlight));

    std::vector<RubricItem> many;
    for (int i = 0; i < 13; ++i) {
        many.push_back(builders::item("Essential " + std::to_string(i),
                                      Tier::kEssential, 1.0));
    }
    many.push_back(builders::item("Important", Tier::kImportant, 1.0));
    many.push_back(builders::item("Highlight", Tier::kHighlight, 1.0));
    for (int i = 0; i < 3; ++i) {
        many.push_back(
            builders::item("Pitfall " + std::to_string(i), Tier::kPitfall, 2.0));
    }
    const auto crowded =
        validate_rubric_set(builders::set("many", many), ValidationMode::kStrict);
    CHECK(has_issue(crowded, ValidationIssueKind::kTooManyItems));
    CHECK(has_issue(crowded, ValidationIssueKind::kTooManyPitfall));
}

TEST_CASE("all bundled documents round-trip to identical structures") {
    for (const char* name :
         {"rubrics/enteric_capsules.json", "rubrics/mole_evaluation.json",
          "rubrics/muscle_relaxant.json"}) {
        const RubricSet first = load_rubric_set(testutil::data_path(name));
        const std::string serialized = rubric_set_to_json(first);
        const RubricSet second = parse_rubric_set(serialized);
        CHECK(first == second);
        // Canonical form is a fixed point of serialize(parse(...)).
        CHECK(rubric_set_to_json(second) == serialized);
    }
}

TEST_CASE("item lookup helpers preserve document order") {
    const RubricSet set =
        load_rubric_set(testutil::data_path("rubrics/enteric_capsules.json"));
    const auto essentials = set.items_in_tier(Tier::kEssential);
    REQUIRE(essentials.size() == 4);
    // items_in_tier returns pointers into `items` in document order.
    std::size_t previous = 0;
    for (const RubricItem* item : essentials) {
        const std::size_t pos = static_cast<std::size_t>(item - set.items.data());
        CHECK(pos >= previous);
        previous = pos;
        CHECK(set.find_item(item->title) == item);
    }
    CHECK(set.find_item("No such criterion") == nullptr);
}

TEST_CASE("malformed rubric documents raise typed errors") {
    CHECK_THROWS_AS(parse_rubric_set("not json at all"), MalformedDocument);
    CHECK_THROWS_AS(parse_rubric_set("[1, 2, 3]"), SchemaViolation);
    CHECK_THROWS_AS(parse_rubric_set("{\"Evaluation_System\": {}}"),
                    SchemaViolation);
    CHECK_THROWS_AS(load_rubric_set("/nonexistent/path.json"), IoError);
}

TEST_CASE("grade sheets serialize and re-parse unchanged") {
    const RubricSet set = builders::set(
        "gs", {builders::item("Alpha", Tier::kEssential, 2.0),
               builders::item("Beta", Tier::kPitfall, 1.0)});
    GradeSheet sheet = builders::sheet(set, {0.5, 0.0});
    sheet.model_name = "model-x";
    sheet.judge_name = "judge-y";
    sheet.response_length = 321;
    const GradeSheet round = parse_grade_sheet(grade_sheet_to_json(sheet));
    CHECK(round == sheet);
}

TEST_CASE("grade sheet parsing rejects off-scale grades") {
    CHECK_THROWS_AS(parse_grade_sheet("{\"grades\": {\"Alpha\": 0.3}}"),
                    SchemaViolation);
    CHECK_THROWS_AS(parse_grade_sheet("{\"grades\": {\"Alpha\": \"1\"}}"),
                    SchemaViolation);
    CHECK_THROWS_AS(parse_grade_sheet("{}"), SchemaViolation);
    CHECK_THROWS_AS(parse_grade_sheet("###"), MalformedDocument);
}

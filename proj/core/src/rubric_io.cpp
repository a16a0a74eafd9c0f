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

#include "rubriceval/rubric_io.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "internal.hpp"
#include "rubriceval/errors.hpp"

namespace rubriceval {

namespace {

using internal::njson;
using internal::normalize_key;

double parse_weight(const njson& value, const std::string& path) {
    if (value.is_number()) {
        return std::fabs(value.get<double>());
    }
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        char* end = nullptr;
        const double parsed = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || s.empty()) {
            throw SchemaViolation(path, "weight string is not numeric: \"" + s + "\"");
        }
        return std::fabs(parsed);
    }
    throw SchemaViolation(path, "weight must be a number");
}

std::string require_string(const njson& value, const std::string& path) {
    if (!value.is_string()) {
        throw SchemaViolation(path, "expected a string");
    }
    return value.get<std::string>();
}

RubricItem parse_item(const njson& node, Tier tier, const std::string& path) {
    if (!node.is_object()) {
        throw SchemaViolation(path, "rubric item must be an object");
    }
    RubricItem item;
    item.tier = tier;
    item.weight = tier == Tier::kPitfall ? 2.0 : 1.0;  // defaults mirror +1/-2

    bool saw_title = false;
    bool saw_description = false;
    for (const auto& [key, value] : node.items()) {
        const std::string norm = normalize_key(key);
        const std::string child = path + "/" + key;
        if (norm == "title") {
            item.title = require_string(value, child);
            saw_title = true;
        } else if (norm == "weight") {
            item.weight = parse_weight(value, child);
        } else if (norm == "tag") {
            const std::string label = require_string(value, child);
            const auto tag = capability_tag_from_string(label);
            if (!tag) {
                throw SchemaViolation(child, "unknown capability tag \"" + label + "\"");
            }
            item.tag = *tag;
        } else if (norm == "difficulty") {
            const std::string label = require_string(value, child);
            const auto difficulty = difficulty_from_string(label);
            if (!difficulty) {
                throw SchemaViolation(child, "unknown difficulty \"" + label + "\"");
            }
            item.difficulty = *difficulty;
        } else if (norm == "perspective") {
            const std::string label = require_string(value, child);
            const auto perspective = perspective_from_string(label);
            if (!perspective) {
                throw SchemaViolation(child, "unknown perspective \"" + label + "\"");
            }
            item.perspective = *perspective;
        } else if (norm == "description" || norm == "descriptions") {
            if (!value.is_object()) {
                throw SchemaViolation(child, "description must be an object");
            }
            for (const auto& [level_key_str, text] : value.items()) {
                const auto level = grade_level_from_string(level_key_str);
                if (!level) {
                    throw SchemaViolation(child + "/" + level_key_str,
                                          "unknown grade level key");
                }
                if (!item.descriptions.emplace(*level,
                                               require_string(text, child + "/" + level_key_str))
                         .second) {
                    throw SchemaViolation(child + "/" + level_key_str,
                                          "grade level given twice");
                }
            }
            if (item.descriptions.size() != 3) {
                throw SchemaViolation(child, "description needs exactly the three grade levels");
            }
            saw_description = true;
        } else {
            throw SchemaViolation(child, "unknown rubric item key");
        }
    }
    if (!saw_title || item.title.empty()) {
        throw SchemaViolation(path, "rubric item needs a non-empty Title");
    }
    if (!saw_description) {
        throw SchemaViolation(path, "rubric item needs a Description with three levels");
    }
    return item;
}

// Reads tier arrays, query fields and provenance out of the object that
// carries the tier keys. `allow_query` is false for the flat layout's
// "rubric" object, where only tier keys are legal.
void parse_container(const njson& node, const std::string& path, bool allow_query,
                     RubricSet& set,
                     std::map<Tier, std::vector<RubricItem>>& by_tier,
                     bool& saw_query) {
    for (const auto& [key, value] : node.items()) {
        const std::string norm = normalize_key(key);
        const std::string child = path + "/" + key;
        if (const auto tier = tier_from_string(key); tier.has_value()) {
            if (!value.is_array()) {
                throw SchemaViolation(child, "tier key must hold an array of items");
            }
            std::size_t index = 0;
            for (const auto& element : value) {
                by_tier[*tier].push_back(
                    parse_item(element, *tier, child + "/" + std::to_string(index)));
                ++index;
            }
            continue;
        }
        if (allow_query && norm == "query") {
            set.query = require_string(value, child);
            saw_query = true;
        } else if (allow_query && (norm == "queryid" || norm == "id")) {
            set.query_id = require_string(value, child);
        } else if (allow_query && norm == "provenance") {
            if (!value.is_object()) {
                throw SchemaViolation(child, "provenance must be an object of strings");
            }
            for (const auto& [pk, pv] : value.items()) {
                set.provenance[pk] = require_string(pv, child + "/" + pk);
            }
        } else if (allow_query && value.is_string()) {
            // Free-form origin metadata (e.g. a department label).
            set.provenance[key] = value.get<std::string>();
        } else {
            throw SchemaViolation(child, "unknown key");
        }
    }
}

njson item_to_json(const RubricItem& item) {
    njson node;
    node["Title"] = item.title;
    node["Weight"] = item.weight;
    if (item.tag) node["Tag"] = to_string(*item.tag);
    if (item.difficulty) node["Difficulty"] = to_string(*item.difficulty);
    if (item.perspective) node["Perspective"] = to_string(*item.perspective);
    njson description;
    for (const GradeLevel level :
         {GradeLevel::kNotMet, GradeLevel::kPartiallyMet, GradeLevel::kFullyMet}) {
        const auto it = item.descriptions.find(level);
        description[level_key(item.tier, level)] =
            it == item.descriptions.end() ? "" : it->second;
    }
    node["Description"] = std::move(description);
    return node;
}

}  // namespace

RubricSet parse_rubric_set(const std::string& document_json) {
    njson doc;
    try {
        doc = njson::parse(document_json);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    if (!doc.is_object()) {
        throw SchemaViolation("/", "document root must be an object");
    }

    RubricSet set;
    std::map<Tier, std::vector<RubricItem>> by_tier;
    bool saw_query = false;

    const njson* wrapped = nullptr;
    std::string wrapped_key;
    const njson* flat_rubric = nullptr;
    std::string flat_key;
    for (const auto& [key, value] : doc.items()) {
        const std::string norm = normalize_key(key);
        if (norm == "evaluationsystem") {
            wrapped = &value;
            wrapped_key = key;
        } else if (norm == "rubric" || norm == "rubrics") {
            flat_rubric = &value;
            flat_key = key;
        }
    }

    if (wrapped != nullptr) {
        if (!wrapped->is_object()) {
            throw SchemaViolation("/" + wrapped_key, "must be an object");
        }
        parse_container(*wrapped, "/" + wrapped_key, /*allow_query=*/true, set,
                        by_tier, saw_query);
    } else if (flat_rubric != nullptr) {
        if (!flat_rubric->is_object()) {
            throw SchemaViolation("/" + flat_key, "must be an object");
        }
        // Query and metadata live at the top level in the flat layout.
        for (const auto& [key, value] : doc.items()) {
            const std::string norm = normalize_key(key);
            const std::string child = "/" + key;
            if (norm == "rubric" || norm == "rubrics") continue;
            if (norm == "query") {
                set.query = require_string(value, child);
                saw_query = true;
            } else if (norm == "queryid" || norm == "id") {
                set.query_id = require_string(value, child);
            } else if (norm == "provenance") {
                if (!value.is_object()) {
                    throw SchemaViolation(child, "provenance must be an object of strings");
                }
                for (const auto& [pk, pv] : value.items()) {
                    set.provenance[pk] = require_string(pv, child + "/" + pk);
                }
            } else if (value.is_string()) {
                set.provenance[key] = value.get<std::string>();
            } else {
                throw SchemaViolation(child, "unknown key");
            }
        }
        parse_container(*flat_rubric, "/" + flat_key, /*allow_query=*/false, set,
                        by_tier, saw_query);
    } else {
        throw SchemaViolation("/", "expected an Evaluation_System or rubric layout");
    }

    if (!saw_query) {
        throw SchemaViolation("/", "document carries no query");
    }
    for (const Tier tier : {Tier::kEssential, Tier::kImportant, Tier::kHighlight,
                            Tier::kPitfall}) {
        for (auto& item : by_tier[tier]) {
            set.items.push_back(std::move(item));
        }
    }
    if (set.items.empty()) {
        throw SchemaViolation("/", "rubric set has no items");
    }
    return set;
}

RubricSet load_rubric_set(const std::string& path) {
    return parse_rubric_set(internal::read_file(path));
}

std::string rubric_set_to_json(const RubricSet& set) {
    njson container;
    container["Query"] = set.query;
    if (!set.query_id.empty()) container["query_id"] = set.query_id;
    if (!set.provenance.empty()) {
        njson provenance;
        for (const auto& [key, value] : set.provenance) {
            provenance[key] = value;
        }
        container["provenance"] = std::move(provenance);
    }
    static const std::pair<Tier, const char*> kTierKeys[] = {
        {Tier::kEssential, "essential"},
        {Tier::kImportant, "important"},
        {Tier::kHighlight, "highlight"},
        {Tier::kPitfall, "pitfall"},
    };
    for (const auto& [tier, key] : kTierKeys) {
        njson array = njson::array();
        for (const auto* item : set.items_in_tier(tier)) {
            array.push_back(item_to_json(*item));
        }
        container[key] = std::move(array);
    }
    njson doc;
    doc["Evaluation_System"] = std::move(container);
    return doc.dump(2) + "\n";
}

std::string grade_sheet_to_json(const GradeSheet& sheet) {
    njson doc;
    doc["query_id"] = sheet.query_id;
    doc["response_id"] = sheet.response_id;
    doc["model_name"] = sheet.model_name;
    doc["judge_name"] = sheet.judge_name;
    doc["response_length"] = sheet.response_length;
    njson grades;
    for (const auto& [title, grade] : sheet.grades) {
        grades[title] = grade;
    }
    doc["grades"] = std::move(grades);
    return doc.dump(2) + "\n";
}

GradeSheet parse_grade_sheet(const std::string& document_json) {
    njson doc;
    try {
        doc = njson::parse(document_json);
    } catch (const njson::parse_error& e) {
        throw MalformedDocument(e.what());
    }
    if (!doc.is_object() || !doc.contains("grades") || !doc["grades"].is_object()) {
        throw SchemaViolation("/grades", "grade sheet needs a grades object");
    }
    GradeSheet sheet;
    sheet.query_id = doc.value("query_id", "");
    sheet.response_id = doc.value("response_id", "");
    sheet.model_name = doc.value("model_name", "");
    sheet.judge_name = doc.value("judge_name", "");
    sheet.response_length = doc.value("response_length", 0LL);
    for (const auto& [title, value] : doc["grades"].items()) {
        if (!value.is_number()) {
            throw SchemaViolation("/grades/" + title, "grade must be a number");
        }
        const double g = value.get<double>();
        if (g != 0.0 && g != 0.5 && g != 1.0) {
            throw SchemaViolation("/grades/" + title,
                                  "grade must be one of 0, 0.5, 1");
        }
        sheet.grades[title] = g;
    }
    return sheet;
}

}  // namespace rubriceval

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

#ifndef RUBRICEVAL_RUBRIC_IO_HPP_
#define RUBRICEVAL_RUBRIC_IO_HPP_

#include <string>

#include "rubriceval/rubric.hpp"

namespace rubriceval {

// Parses a rubric document. Two layouts are accepted:
//   {"Evaluation_System": {"Query": ..., "essential": [...], ...}}
//   {"query": ..., "rubric": {"essential": [...], ...}}
// Tier keys match case-insensitively and "pitful"/"pit" are accepted for the
// Pitfall tier; item keys "Title"/"title", "Weight"/"weight" (optional,
// negative values are coerced to magnitude, missing defaults to 1 for
// positive tiers and 2 for Pitfall), optional "Tag"/"Difficulty"/
// "Perspective", and a three-level "Description"/"description" map whose
// keys tolerate the common spelling variants. Throws MalformedDocument for
// non-JSON input and SchemaViolation (with node path) for schema breaks.
RubricSet parse_rubric_set(const std::string& document_json);

// Reads and parses a rubric document from disk. Throws IoError when the file
// cannot be read.
RubricSet load_rubric_set(const std::string& path);

// Canonical serialization: "Evaluation_System" layout, canonical tier keys
// ("essential"/"important"/"highlight"/"pitfall"), canonical item keys and
// grade-level keys, two-space indentation, trailing newline.
// parse(rubric_set_to_json(s)) reproduces s for any valid set.
std::string rubric_set_to_json(const RubricSet& set);

// Grade-sheet serialization. Grades are stored normalized ({0, 0.5, 1}).
std::string grade_sheet_to_json(const GradeSheet& sheet);
GradeSheet parse_grade_sheet(const std::string& document_json);

}  // namespace rubriceval

#endif  // RUBRICEVAL_RUBRIC_IO_HPP_

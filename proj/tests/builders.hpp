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

#ifndef RUBRICEVAL_TESTS_BUILDERS_HPP_
#define RUBRICEVAL_TESTS_BUILDERS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "rubriceval/rubric.hpp"

namespace builders {

inline rubriceval::RubricItem item(
    std::string title, rubriceval::Tier tier, double weight,
    std::optional<rubriceval::CapabilityTag> tag = std::nullopt) {
    rubriceval::RubricItem out;
    out.title = std::move(title);
    out.tier = tier;
    out.weight = weight;
    out.tag = tag;
    const bool pitfall = tier == rubriceval::Tier::kPitfall;
    out.descriptions = {
        {rubriceval::GradeLevel::kNotMet,
         pitfall ? "No such error appears." : "Misses " + out.title + "."},
        {rubriceval::GradeLevel::kPartiallyMet,
         pitfall ? "A minor slip appears." : "Touches " + out.title + "."},
        {rubriceval::GradeLevel::kFullyMet,
         pitfall ? "A major error appears." : "Covers " + out.title + "."},
    };
    return out;
}

inline rubriceval::RubricSet set(std::string query_id,
                                 std::vector<rubriceval::RubricItem> items) {
    rubriceval::RubricSet out;
    out.query = "Synthetic query " + query_id;
    out.query_id = std::move(query_id);
    out.items = std::move(items);
    return out;
}

// One grade per item, in item order.
inline rubriceval::GradeSheet sheet(const rubriceval::RubricSet& set,
                                    const std::vector<double>& grades) {
    rubriceval::GradeSheet out;
    out.query_id = set.query_id;
    out.response_id = set.query_id + "-r";
    out.model_name = "test-model";
    out.judge_name = "test-judge";
    out.response_length = 42;
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        out.grades[set.items[i].title] = grades.at(i);
    }
    return out;
}

}  // namespace builders

#endif  // RUBRICEVAL_TESTS_BUILDERS_HPP_

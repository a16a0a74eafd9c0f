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

#ifndef RUBRICEVAL_PROMPT_HPP_
#define RUBRICEVAL_PROMPT_HPP_

#include <map>
#include <string>
#include <vector>

#include "rubriceval/rubric.hpp"

namespace rubriceval {

// Minimal placeholder template: occurrences of {name} are replaced by the
// bound value. Unbound placeholders throw InvalidConfig at render time;
// "{{" escapes a literal brace.
class PromptTemplate {
public:
    explicit PromptTemplate(std::string text);
    static PromptTemplate from_file(const std::string& path);

    const std::string& text() const { return text_; }
    // Placeholder names in order of first appearance.
    std::vector<std::string> placeholders() const;
    std::string render(const std::map<std::string, std::string>& values) const;

private:
    std::string text_;
};

// Built-in scoring-prompt template with {question}, {rules} and {answer}
// placeholders. The instruction text pins the 0/1/2 grade scale and the
// JSON verdict shape (score_detail, item_grades, score_final).
const std::string& default_scoring_template();

// Renders the full judge prompt: {rules} receives the canonical rubric
// serialization (rubric_set_to_json), so the rubric inside the prompt matches
// the on-disk file format byte-for-byte.
std::string render_scoring_prompt(const PromptTemplate& tpl,
                                  const RubricSet& set,
                                  const std::string& response);
std::string render_scoring_prompt(const RubricSet& set,
                                  const std::string& response);

}  // namespace rubriceval

#endif  // RUBRICEVAL_PROMPT_HPP_

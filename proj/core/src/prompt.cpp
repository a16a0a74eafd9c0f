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

#include "rubriceval/prompt.hpp"

#include <cctype>

#include "internal.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/rubric_io.hpp"

namespace rubriceval {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Scans `text` for {name} placeholders. "{{" / "}}" are brace escapes; a
// brace not introducing a well-formed placeholder is literal, which lets
// JSON examples live in templates unescaped.
template <typename OnLiteral, typename OnPlaceholder>
void scan_template(const std::string& text, OnLiteral&& literal,
                   OnPlaceholder&& placeholder) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c == '{' && i + 1 < n && text[i + 1] == '{') {
            literal('{');
            i += 2;
            continue;
        }
        if (c == '}' && i + 1 < n && text[i + 1] == '}') {
            literal('}');
            i += 2;
            continue;
        }
        if (c == '{') {
            std::size_t j = i + 1;
            while (j < n && is_name_char(text[j])) ++j;
            if (j > i + 1 && j < n && text[j] == '}') {
                placeholder(text.substr(i + 1, j - i - 1));
                i = j + 1;
                continue;
            }
        }
        literal(c);
        ++i;
    }
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
    return PromptTemplate(internal::read_file(path));
}

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> names;
    scan_template(
        text_, [](char) {},
        [&names](const std::string& name) {
            for (const auto& seen : names) {
                if (seen == name) return;
            }
            names.push_back(name);
        });
    return names;
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size());
    scan_template(
        text_, [&out](char c) { out.push_back(c); },
        [&](const std::string& name) {
            const auto it = values.find(name);
            if (it == values.end()) {
                throw InvalidConfig("unbound template placeholder {" + name + "}");
            }
            out += it->second;
        });
    return out;
}

const std::string& default_scoring_template() {
    static const std::string kTemplate = R"TPL(You are a meticulous reviewer for open-ended question answering. Grade the response strictly against the scoring rules; do not reward content the rules do not ask for.

[Question]
{question}

[Review and Scoring Rules]
{rules}

[Response to Evaluate]
{answer}

[Procedure]
1. Walk the rubric items one by one and award raw points per item:
   - Essential, Important and Highlight items: 2 = Fully Met, 1 = Partially Met, 0 = Not Met.
   - Pitfall items: 2 = Major Error, 1 = Minor Error, 0 = No Error.
2. For each dimension, multiply each item's points by its weight and sum, giving the dimension subtotal. The total is Essential + Important + Highlight - Pitfall.
3. Answer with a short justification followed by exactly one JSON object:

{"score_detail": {"Essential Rubrics": <number>, "Important Rubrics": <number>, "Highlight Rubrics": <number>, "Pitfall Rubrics": <number>, "Total": <number>}, "item_grades": {"<item title>": <0 | 1 | 2>}, "score_final": <number>}

Every rubric item title must appear in "item_grades" exactly as written in the rules.
)TPL";
    return kTemplate;
}

std::string render_scoring_prompt(const PromptTemplate& tpl, const RubricSet& set,
                                  const std::string& response) {
    return tpl.render({{"question", set.query},
                       {"rules", rubric_set_to_json(set)},
                       {"answer", response}});
}

std::string render_scoring_prompt(const RubricSet& set,
                                  const std::string& response) {
    return render_scoring_prompt(PromptTemplate(default_scoring_template()), set,
                                 response);
}

}  // namespace rubriceval

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

// Internal helpers shared by core translation units. Not installed.

#ifndef RUBRICEVAL_SRC_INTERNAL_HPP_
#define RUBRICEVAL_SRC_INTERNAL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rubriceval::internal {

// Insertion-ordered JSON keeps every serialization byte-stable.
using njson = nlohmann::ordered_json;

// Lowercases and strips non-alphanumeric bytes: the normal form used for
// alias-tolerant key and label matching.
std::string normalize_key(const std::string& s);

// All balanced top-level {...} blocks of `text`, string-escape aware, in
// order of appearance.
std::vector<std::string> json_object_candidates(const std::string& text);

// Last balanced top-level {...} block of `text`. Returns nullopt when none
// closes.
std::optional<std::string> last_json_object(const std::string& text);

// splitmix64: tiny deterministic mixer for stub content and mock prose.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_string(const std::string& s, std::uint64_t seed);

// Fixed-point decimal formatting (snprintf "%.*f"): locale-independent.
std::string fixed(double value, int decimals);

std::string read_file(const std::string& path);          // throws IoError
void write_file(const std::string& path, const std::string& content);
void append_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);  // mkdir -p, throws IoError

}  // namespace rubriceval::internal

#endif  // RUBRICEVAL_SRC_INTERNAL_HPP_

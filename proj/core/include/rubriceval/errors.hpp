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

#ifndef RUBRICEVAL_ERRORS_HPP_
#define RUBRICEVAL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rubriceval {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Document is not parseable JSON at all.
class MalformedDocument : public Error {
public:
    explicit MalformedDocument(const std::string& detail)
        : Error("malformed document: " + detail) {}
};

// Document is JSON but violates the rubric/grade-sheet schema. Carries the
// JSON-pointer-ish path of the offending node.
class SchemaViolation : public Error {
public:
    SchemaViolation(const std::string& path, const std::string& detail)
        : Error("schema violation at " + path + ": " + detail), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Grade sheet and rubric set disagree on item titles.
class GradeMismatch : public Error {
public:
    explicit GradeMismatch(const std::string& detail)
        : Error("grade mismatch: " + detail) {}
};

// Scoring denominator (positive capacity minus pitfall capacity) is <= 0.
class DegenerateDenominator : public Error {
public:
    explicit DegenerateDenominator(double denominator)
        : Error("degenerate scoring denominator: " +
                std::to_string(denominator)),
          denominator_(denominator) {}
    double denominator() const { return denominator_; }

private:
    double denominator_;
};

// A configuration value is outside its documented domain.
class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& detail)
        : Error("invalid config: " + detail) {}
};

// Judge reply contained no top-level JSON object.
class NoJsonFound : public Error {
public:
    explicit NoJsonFound(const std::string& detail)
        : Error("no JSON object found in judge reply: " + detail) {}
};

// Judge reply had a JSON object but no usable per-item grades.
class PartialVerdict : public Error {
public:
    explicit PartialVerdict(const std::string& detail)
        : Error("partial verdict: " + detail) {}
};

// Judge graded an item title that is not part of the rubric set.
class UnknownItemTitle : public Error {
public:
    explicit UnknownItemTitle(const std::string& title)
        : Error("unknown item title in verdict: \"" + title + "\""),
          title_(title) {}
    const std::string& title() const { return title_; }

private:
    std::string title_;
};

// Judge emitted a grade outside the raw 0/1/2 scale.
class OutOfRangeGrade : public Error {
public:
    OutOfRangeGrade(const std::string& title, double value)
        : Error("out-of-range grade for \"" + title +
                "\": " + std::to_string(value)) {}
};

// HTTP-level failure talking to a judge endpoint (no retry performed).
class TransportError : public Error {
public:
    explicit TransportError(const std::string& detail)
        : Error("transport error: " + detail) {}
};

// Endpoint answered 429; retried internally, surfaced only via ExhaustedRetries.
class RateLimited : public Error {
public:
    explicit RateLimited(const std::string& detail)
        : Error("rate limited: " + detail) {}
};

// Retry budget spent without a usable reply. Carries the last cause.
class ExhaustedRetries : public Error {
public:
    ExhaustedRetries(int attempts, const std::string& last_cause)
        : Error("exhausted " + std::to_string(attempts) +
                " attempts; last cause: " + last_cause),
          attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

// A complexity axis score fell outside {0, 1, 2}.
class AxisOutOfRange : public Error {
public:
    AxisOutOfRange(const std::string& axis, double value)
        : Error("axis \"" + axis + "\" out of range: " + std::to_string(value)) {}
};

// Stage 3 could not produce a strictly valid rubric set after the retry.
class ExtractionFailed : public Error {
public:
    explicit ExtractionFailed(const std::string& detail)
        : Error("rubric extraction failed: " + detail) {}
};

// A cross-module report invariant did not hold at render time.
class ReportInvariantViolation : public Error {
public:
    explicit ReportInvariantViolation(const std::string& detail)
        : Error("report invariant violation: " + detail) {}
};

// Filesystem or OS-level failure (missing file, unwritable directory).
class IoError : public Error {
public:
    explicit IoError(const std::string& detail) : Error("io error: " + detail) {}
};

}  // namespace rubriceval

#endif  // RUBRICEVAL_ERRORS_HPP_

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

#ifndef RUBRICEVAL_PIPELINE_HPP_
#define RUBRICEVAL_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rubriceval/judge.hpp"
#include "rubriceval/rubric.hpp"
#include "rubriceval/scoring.hpp"

namespace rubriceval {

// What a backend does inside the pipeline.
enum class BackendRole {
    kGenerator,     // stage 1 candidate answers
    kAggregator,    // stage 2 knowledge extraction over the pool
    kVerifier,      // stage 2 accept/reject of extracted points
    kExtractor,     // stage 3 rubric synthesis
    kEvalModel,     // stage 4 responses under evaluation
    kDeepResearch,  // backtracking supplement
    kLabeler,       // complexity labeling
};
const std::string& to_string(BackendRole r);
std::optional<BackendRole> backend_role_from_string(const std::string& label);

// Prompt flavor for stage-1 generation.
enum class PromptStyle { kBasic, kPro, kAha };
const std::string& to_string(PromptStyle s);
std::optional<PromptStyle> prompt_style_from_string(const std::string& label);

// Pluggable chat backend: one prompt in, one completion out. Implementations
// must be safe to call from several threads at once.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual const std::string& name() const = 0;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Offline deterministic backend: the completion is a pure function of
// (name, role, prompt, seed). Stage outputs are well-formed for their role,
// so the same parsers run as with live backends. A backend constructed with
// `always_low = true` produces eval responses that grade to zero, for
// exercising the non-convergent path.
class StubBackend : public ModelBackend {
public:
    StubBackend(std::string name, BackendRole role, std::uint64_t seed,
                bool always_low = false);
    const std::string& name() const override;
    std::string complete(const std::string& prompt) override;

private:
    std::string name_;
    BackendRole role_;
    std::uint64_t seed_;
    bool always_low_;
};

// Live backend over an OpenAI-compatible endpoint.
class HttpBackend : public ModelBackend {
public:
    HttpBackend(std::string name, JudgeEndpoint endpoint);
    const std::string& name() const override;
    std::string complete(const std::string& prompt) override;

private:
    std::string name_;
    std::unique_ptr<JudgeClient> client_;
};

struct BackendSpec {
    std::string name;
    BackendRole role = BackendRole::kGenerator;
    JudgeEndpoint endpoint;  // unused in stub mode
    int samples_per_prompt = 3;  // generators only
    std::vector<PromptStyle> styles = {PromptStyle::kBasic, PromptStyle::kPro,
                                       PromptStyle::kAha};
    bool always_low = false;  // stub generators/eval models only
};

struct Candidate {
    std::string backend;
    PromptStyle style = PromptStyle::kBasic;
    int sample_index = 0;
    std::string text;
};

// Knowledge-point category: core facts, highlight insights, supplementary
// context ("imp"/"aha"/"ext" in the serialized ground truth).
enum class KnowledgeCategory { kCore, kHighlight, kSupplementary };
const std::string& to_string(KnowledgeCategory c);

struct KnowledgePoint {
    std::string text;
    KnowledgeCategory category = KnowledgeCategory::kCore;
    bool verified = false;
    std::string verifier;  // backend that accepted the point
};

// Aggregated ground truth with per-source attribution.
struct GroundTruthDocument {
    std::string query;
    std::map<std::string, std::vector<KnowledgePoint>> by_source;

    std::vector<const KnowledgePoint*> verified_points(KnowledgeCategory c) const;
};
std::string ground_truth_to_json(const GroundTruthDocument& gt);
GroundTruthDocument parse_ground_truth(const std::string& document_json);

enum class CalibrationStatus { kConverged, kBacktracking, kNeedsHumanReview };
const std::string& to_string(CalibrationStatus s);

enum class CalibrationStatistic { kMedian, kMean };

struct CalibrationRecord {
    int iteration = 0;
    std::vector<double> scores;  // one weighted overall per eval model
    double statistic = 0.0;
    CalibrationStatus decision = CalibrationStatus::kConverged;
};

struct PipelineQuery {
    std::string query_id;
    std::string query;
};
std::vector<PipelineQuery> load_queries(const std::string& path);  // JSONL

struct PipelineConfig {
    std::vector<BackendSpec> backends;
    // Grader for stage 4; absent (or stub_mode) falls back to the mock judge.
    std::optional<JudgeEndpoint> judge_endpoint;
    double threshold = 0.6;  // calibration floor on the score statistic
    CalibrationStatistic statistic = CalibrationStatistic::kMedian;
    int max_iterations = 3;
    ScoringConfig scoring;
    std::uint64_t seed = 0;
    bool stub_mode = false;
    int query_parallelism = 1;
};
PipelineConfig parse_pipeline_config(const std::string& document_json);

struct QueryOutcome {
    PipelineQuery query;
    CalibrationStatus status = CalibrationStatus::kNeedsHumanReview;
    RubricSet rubric;
    GroundTruthDocument ground_truth;
    std::vector<Candidate> pool;
    std::vector<CalibrationRecord> calibration_log;
    std::string provenance;  // "pipeline", "human_review" or "resumed"
};

// Structured extraction output of stage 2: the three sections an aggregator
// reply must carry, in order core / highlight / supplementary.
struct ExtractionSections {
    std::vector<std::string> core;
    std::vector<std::string> highlight;
    std::vector<std::string> supplementary;
};
// Parses the sectioned aggregate reply ("Core Knowledge Points" /
// "Highlight Information" / "Supplementary Content" headings with numbered
// entries). Throws MalformedDocument when no section is found.
ExtractionSections parse_extraction_sections(const std::string& reply);

// Parses a verifier reply: last JSON object with "verdicts":
// [{"index": i, "verdict": "verified"|"rejected"}]. Indices outside
// [0, point_count) throw SchemaViolation.
std::vector<bool> parse_verification(const std::string& reply,
                                     std::size_t point_count);

// Built-in stage prompt templates (PromptTemplate syntax).
const std::string& candidate_template(PromptStyle style);   // {question}
const std::string& aggregation_template();  // {question} {responses}
const std::string& verification_template(); // {question} {points}
const std::string& extraction_template();   // {question} {ground_truth}
const std::string& complexity_template();   // {question}

// Complexity labeling: nine axes scored 0/1/2, five input-side and four
// output-side, fixed order.
const std::vector<std::string>& complexity_axis_names();
struct ComplexityAxisScore {
    std::string axis;
    int score = 0;
    std::string reason;
};
struct ComplexityLabel {
    std::string query;
    std::vector<ComplexityAxisScore> axes;  // canonical axis order
    int input_subtotal = 0;
    int output_subtotal = 0;
    int total = 0;
    std::vector<std::string> warnings;  // e.g. corrected subtotals
};
// Parses a labeler reply; recomputes subtotals from the per-axis scores and
// records a warning when the reply's own arithmetic disagrees. Scores
// outside {0, 1, 2} throw AxisOutOfRange.
ComplexityLabel parse_complexity_label(const std::string& reply);
std::string complexity_label_to_json(const ComplexityLabel& label);

// Runs the stages for a set of queries. Per-query state lives under
// <out_dir>/state/<query_id>.json and converged rubrics under
// <out_dir>/rubrics/<query_id>.json; non-convergent queries are serialized
// to <out_dir>/review/<query_id>.json. An operator-provided
// <out_dir>/review/<query_id>.corrected.json rubric document is picked up on
// the next run (strictly validated) and marks the query converged with
// human-review provenance. Queries already converged in a previous run are
// skipped.
class PipelineOrchestrator {
public:
    PipelineOrchestrator(PipelineConfig config, std::string out_dir);

    // Stage 1: concurrent fan-out over generator backends x styles x
    // samples_per_prompt. Pool order is deterministic regardless of
    // completion order.
    std::vector<Candidate> stage1_generate(const PipelineQuery& query);
    // Stage 2: aggregators extract knowledge points from the pool, verifiers
    // accept or reject each point.
    GroundTruthDocument stage2_aggregate(const PipelineQuery& query,
                                         const std::vector<Candidate>& pool);
    // Stage 3: extractor synthesizes a rubric document; strict validation
    // with one retry, then ExtractionFailed carrying the violations.
    RubricSet stage3_extract(const PipelineQuery& query,
                             const GroundTruthDocument& gt);
    // Stage 4: eval models answer the query, the judge grades against the
    // rubric, and the score statistic decides the calibration outcome.
    CalibrationRecord stage4_calibrate(const PipelineQuery& query,
                                       const RubricSet& rubric, int iteration);

    QueryOutcome run_query(const PipelineQuery& query);
    std::vector<QueryOutcome> run(const std::vector<PipelineQuery>& queries);

    ComplexityLabel label_complexity(const PipelineQuery& query);

private:
    struct Runtime;
    std::shared_ptr<Runtime> rt_;
};

struct PipelineSummary {
    std::size_t converged = 0;
    std::size_t needs_review = 0;
    std::size_t resumed = 0;
};
PipelineSummary run_pipeline(const std::vector<PipelineQuery>& queries,
                             const PipelineConfig& config,
                             const std::string& out_dir);

std::string query_outcome_to_json(const QueryOutcome& outcome);
QueryOutcome parse_query_outcome(const std::string& document_json);

}  // namespace rubriceval

#endif  // RUBRICEVAL_PIPELINE_HPP_

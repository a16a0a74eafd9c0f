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

// Microbenchmarks for the hot paths: scoring, document parsing and the
// mock-judge round trip.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "rubriceval/judge.hpp"
#include "rubriceval/rubric_io.hpp"
#include "rubriceval/scoring.hpp"

namespace {

using namespace rubriceval;

RubricItem bench_item(std::string title, Tier tier, double weight,
                      std::optional<CapabilityTag> tag = std::nullopt) {
    RubricItem item;
    item.title = std::move(title);
    item.tier = tier;
    item.weight = weight;
    item.tag = tag;
    const bool pitfall = tier == Tier::kPitfall;
    item.descriptions = {
        {GradeLevel::kNotMet,
         pitfall ? "No such error appears." : "Misses " + item.title + "."},
        {GradeLevel::kPartiallyMet,
         pitfall ? "A minor slip appears." : "Touches " + item.title + "."},
        {GradeLevel::kFullyMet,
         pitfall ? "A major error appears." : "Covers " + item.title + "."},
    };
    return item;
}

RubricSet bench_set() {
    RubricSet set;
    set.query_id = "bench";
    set.query = "Synthetic benchmark query";
    set.items = {
        bench_item("Names the first-line option", Tier::kEssential, 2.0),
        bench_item("States the dosing ceiling", Tier::kEssential, 2.0),
        bench_item("Explains the taper schedule", Tier::kImportant, 1.0,
                   CapabilityTag::kSafety),
        bench_item("Mentions monitoring cadence", Tier::kImportant, 1.0,
                   CapabilityTag::kSafety),
        bench_item("Cites the guideline edition", Tier::kHighlight, 1.0,
                   CapabilityTag::kEvidenceSupport),
        bench_item("Recommends an unsafe combination", Tier::kPitfall, 2.0),
    };
    return set;
}

GradeSheet bench_sheet(const RubricSet& set) {
    GradeSheet sheet;
    sheet.query_id = set.query_id;
    sheet.response_id = "bench-r";
    sheet.model_name = "bench-model";
    sheet.judge_name = "bench-judge";
    sheet.response_length = 180;
    double grade = 0.0;
    for (const auto& item : set.items) {
        sheet.grades[item.title] = Grade{grade};
        grade = grade >= 1.0 ? 0.0 : grade + 0.5;
    }
    return sheet;
}

void bm_weighted_score(benchmark::State& state) {
    const RubricSet set = bench_set();
    const GradeSheet sheet = bench_sheet(set);
    ScoringConfig config;
    config.truncation_enabled = true;
    config.saturation_enabled = true;
    for (auto _ : state) {
        benchmark::DoNotOptimize(weighted_score(set, sheet, config));
    }
}
BENCHMARK(bm_weighted_score);

void bm_ablation_suite(benchmark::State& state) {
    const RubricSet set = bench_set();
    const GradeSheet sheet = bench_sheet(set);
    const ScoringConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ablation_suite(set, sheet, config));
    }
}
BENCHMARK(bm_ablation_suite);

void bm_parse_rubric_set(benchmark::State& state) {
    const std::string document = rubric_set_to_json(bench_set());
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_rubric_set(document));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(document.size()));
}
BENCHMARK(bm_parse_rubric_set);

void bm_mock_grade_round_trip(benchmark::State& state) {
    const RubricSet set = bench_set();
    std::string response = "Benchmark candidate answer.";
    for (const auto& item : set.items) {
        response += " " + item.descriptions.at(GradeLevel::kFullyMet);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(mock_grade(set, response, 42));
    }
}
BENCHMARK(bm_mock_grade_round_trip);

}  // namespace

BENCHMARK_MAIN();

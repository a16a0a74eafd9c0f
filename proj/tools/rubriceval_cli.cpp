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

// rubriceval: command-line front end over the core library.
//
// Exit codes: 0 success, 1 operational failure (bad input data, transport
// or scoring errors), 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rubriceval/consistency.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/judge.hpp"
#include "rubriceval/pipeline.hpp"
#include "rubriceval/prompt.hpp"
#include "rubriceval/report.hpp"
#include "rubriceval/reward.hpp"
#include "rubriceval/rubric.hpp"
#include "rubriceval/rubric_io.hpp"
#include "rubriceval/scoring.hpp"

namespace {

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw rubriceval::IoError("cannot read " + path);
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw rubriceval::IoError("cannot write " + out_path);
    }
    out << content;
}

// ----- shared scoring-config flags ----- //

struct ScoringFlags {
    std::string config_path;
    std::string weights;  // "E:I:H:P"
    bool truncation = false;
    bool saturation = false;
    double ratio_essential = -1.0;
    double ratio_pitfall = -1.0;
    double saturation_cap = -1.0;
    double essential_multiplier = -1.0;
};

void add_scoring_flags(CLI::App* cmd, ScoringFlags* flags) {
    cmd->add_option("--scoring-config", flags->config_path,
                    "JSON scoring config file (flags below override it)");
    cmd->add_option("--weights", flags->weights,
                    "tier weights as E:I:H:P, e.g. 2:1:1:2");
    cmd->add_flag("--truncation", flags->truncation,
                  "enable the hard-rejection gate");
    cmd->add_flag("--saturation", flags->saturation,
                  "enable the diminishing-returns cap");
    cmd->add_option("--ratio-essential", flags->ratio_essential,
                    "essential floor as a fraction of capacity");
    cmd->add_option("--ratio-pitfall", flags->ratio_pitfall,
                    "pitfall ceiling as a fraction of capacity");
    cmd->add_option("--saturation-cap", flags->saturation_cap,
                    "per-bucket saturation cap in raw points");
    cmd->add_option("--essential-multiplier", flags->essential_multiplier,
                    "combined Important+Highlight bound as a multiple of raw Essential");
}

std::map<rubriceval::Tier, double> parse_weight_spec(const std::string& spec) {
    std::vector<double> values;
    std::istringstream in(spec);
    std::string part;
    while (std::getline(in, part, ':')) {
        try {
            values.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw rubriceval::InvalidConfig("bad weight spec \"" + spec + "\"");
        }
    }
    if (values.size() != 4) {
        throw rubriceval::InvalidConfig("weight spec needs four fields (E:I:H:P): \"" +
                                        spec + "\"");
    }
    return {{rubriceval::Tier::kEssential, values[0]},
            {rubriceval::Tier::kImportant, values[1]},
            {rubriceval::Tier::kHighlight, values[2]},
            {rubriceval::Tier::kPitfall, values[3]}};
}

rubriceval::ScoringConfig resolve_scoring(const ScoringFlags& flags) {
    rubriceval::ScoringConfig config;
    if (!flags.config_path.empty()) {
        config = rubriceval::parse_scoring_config(read_file(flags.config_path));
    }
    if (!flags.weights.empty()) {
        config.tier_weights = parse_weight_spec(flags.weights);
    }
    if (flags.truncation) config.truncation_enabled = true;
    if (flags.saturation) config.saturation_enabled = true;
    if (flags.ratio_essential >= 0.0) config.ratio_essential = flags.ratio_essential;
    if (flags.ratio_pitfall >= 0.0) config.ratio_pitfall = flags.ratio_pitfall;
    if (flags.saturation_cap >= 0.0) config.saturation_cap = flags.saturation_cap;
    if (flags.essential_multiplier >= 0.0) {
        config.essential_multiplier = flags.essential_multiplier;
    }
    rubriceval::validate_config(config);
    return config;
}

// ----- shared judge flags ----- //

struct JudgeFlags {
    bool mock = false;
    std::uint64_t seed = 0;
    std::string url;
    std::string model;
    std::string token_env = "RUBRICEVAL_JUDGE_TOKEN";
    int concurrency = 4;
    int retries = 3;
    long long timeout_ms = 30000;
};

void add_judge_flags(CLI::App* cmd, JudgeFlags* flags) {
    cmd->add_flag("--mock-judge", flags->mock,
                  "grade with the deterministic offline judge");
    cmd->add_option("--seed", flags->seed, "seed for the mock judge prose");
    cmd->add_option("--judge-url", flags->url,
                    "OpenAI-compatible base URL, e.g. http://host:8000/v1");
    cmd->add_option("--judge-model", flags->model, "judge model name");
    cmd->add_option("--judge-token-env", flags->token_env,
                    "environment variable holding the bearer token");
    cmd->add_option("--concurrency", flags->concurrency,
                    "max in-flight judge requests");
    cmd->add_option("--retries", flags->retries, "judge retry budget");
    cmd->add_option("--timeout-ms", flags->timeout_ms, "judge request timeout");
}

// Builds the JudgeFn plus its display name. The client outlives the
// returned closure via shared ownership.
std::pair<rubriceval::JudgeFn, std::string> resolve_judge(const JudgeFlags& flags) {
    if (flags.mock || flags.url.empty()) {
        if (!flags.mock && flags.url.empty()) {
            throw rubriceval::InvalidConfig(
                "no judge configured: pass --judge-url or --mock-judge");
        }
        const std::uint64_t seed = flags.seed;
        rubriceval::JudgeFn fn = [seed](const rubriceval::RubricSet& set,
                                        const std::string& response) {
            return rubriceval::mock_grade(set, response, seed).sheet;
        };
        return {std::move(fn), "mock-judge"};
    }
    rubriceval::JudgeEndpoint endpoint;
    endpoint.base_url = flags.url;
    endpoint.model_name = flags.model;
    endpoint.auth_token = rubriceval::auth_token_from_env(flags.token_env);
    endpoint.max_concurrency = flags.concurrency;
    endpoint.max_retries = flags.retries;
    endpoint.timeout = std::chrono::milliseconds(flags.timeout_ms);
    auto client = std::make_shared<rubriceval::JudgeClient>(endpoint);
    rubriceval::JudgeFn fn = [client](const rubriceval::RubricSet& set,
                                      const std::string& response) {
        const std::string prompt = rubriceval::render_scoring_prompt(set, response);
        auto verdict =
            rubriceval::parse_verdict(client->complete(prompt).text, set);
        verdict.sheet.judge_name = client->endpoint().model_name;
        return verdict.sheet;
    };
    return {std::move(fn), flags.model};
}

// ----- subcommand bodies ----- //

int cmd_validate(const std::vector<std::string>& paths, bool strict) {
    const auto mode = strict ? rubriceval::ValidationMode::kStrict
                             : rubriceval::ValidationMode::kLenient;
    bool all_valid = true;
    for (const auto& path : paths) {
        const rubriceval::RubricSet set = rubriceval::load_rubric_set(path);
        const auto issues = rubriceval::validate_rubric_set(set, mode);
        if (issues.empty()) {
            std::cout << path << ": valid (" << set.items.size() << " items)\n";
            continue;
        }
        all_valid = false;
        std::cout << path << ": " << issues.size() << " issue(s)\n";
        for (const auto& issue : issues) {
            std::cout << "  " << rubriceval::to_string(issue.kind) << ": "
                      << issue.detail << "\n";
        }
    }
    return all_valid ? 0 : 1;
}

int cmd_score(const std::string& rubric_path, const std::string& response_path,
              const std::string& grades_path, const ScoringFlags& scoring_flags,
              const JudgeFlags& judge_flags, bool ablation) {
    const rubriceval::RubricSet set = rubriceval::load_rubric_set(rubric_path);
    const rubriceval::ScoringConfig config = resolve_scoring(scoring_flags);

    rubriceval::GradeSheet sheet;
    if (!grades_path.empty()) {
        sheet = rubriceval::parse_grade_sheet(read_file(grades_path));
    } else if (!response_path.empty()) {
        const auto [judge, name] = resolve_judge(judge_flags);
        sheet = judge(set, read_file(response_path));
        (void)name;
    } else {
        throw rubriceval::InvalidConfig("score needs --response or --grades");
    }

    if (ablation) {
        std::cout << rubriceval::ablation_to_json(
            rubriceval::ablation_suite(set, sheet, config));
    } else {
        std::cout << rubriceval::breakdown_to_json(
            rubriceval::weighted_score(set, sheet, config));
    }
    return 0;
}

int cmd_prompt(const std::string& rubric_path, const std::string& response_path,
               const std::string& template_path) {
    const rubriceval::RubricSet set = rubriceval::load_rubric_set(rubric_path);
    const std::string response =
        response_path.empty() ? "" : read_file(response_path);
    if (template_path.empty()) {
        std::cout << rubriceval::render_scoring_prompt(set, response);
    } else {
        std::cout << rubriceval::render_scoring_prompt(
            rubriceval::PromptTemplate::from_file(template_path), set, response);
    }
    return 0;
}

int cmd_evaluate(const std::string& rubrics_dir, const std::string& responses_dir,
                 const std::string& model, const std::string& run_path,
                 const ScoringFlags& scoring_flags, const JudgeFlags& judge_flags) {
    std::vector<std::string> rubric_files;
    for (const auto& entry : fs::directory_iterator(rubrics_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            rubric_files.push_back(entry.path().string());
        }
    }
    std::sort(rubric_files.begin(), rubric_files.end());
    if (rubric_files.empty()) {
        throw rubriceval::InvalidConfig("no .json rubric files under " + rubrics_dir);
    }

    std::vector<rubriceval::CorpusEntry> corpus;
    for (const auto& path : rubric_files) {
        rubriceval::CorpusEntry entry;
        entry.rubric = rubriceval::load_rubric_set(path);
        if (entry.rubric.query_id.empty()) {
            entry.rubric.query_id = fs::path(path).stem().string();
        }
        entry.response = read_file(
            (fs::path(responses_dir) / (entry.rubric.query_id + ".txt")).string());
        corpus.push_back(std::move(entry));
    }

    const rubriceval::ScoringConfig config = resolve_scoring(scoring_flags);
    const auto [judge, judge_name] = resolve_judge(judge_flags);
    const rubriceval::EvaluationRun run = rubriceval::evaluate_batch(
        run_path, model, judge_name, corpus, judge, config);
    std::cout << "model " << run.model_name << ": " << run.results.size()
              << " scored, " << run.errors.size() << " errors -> " << run_path
              << "\n";
    return 0;
}

int cmd_leaderboard(const std::vector<std::string>& run_paths,
                    const std::string& sort_key, const std::string& format,
                    const std::vector<double>& edges, const std::string& out_path) {
    std::vector<rubriceval::EvaluationRun> runs;
    for (const auto& path : run_paths) {
        runs.push_back(rubriceval::load_run_file(path));
    }
    rubriceval::LeaderboardOptions options;
    if (sort_key == "base") {
        options.sort_key = rubriceval::LeaderboardSortKey::kBase;
    } else if (sort_key == "saturation") {
        options.sort_key = rubriceval::LeaderboardSortKey::kSaturation;
    } else if (sort_key == "truncation") {
        options.sort_key = rubriceval::LeaderboardSortKey::kTruncation;
    } else if (sort_key == "both") {
        options.sort_key = rubriceval::LeaderboardSortKey::kBoth;
    } else {
        throw rubriceval::InvalidConfig("unknown sort key \"" + sort_key + "\"");
    }
    options.bucket_edges = edges;
    const auto rows = rubriceval::build_leaderboard(runs, options);
    std::string rendered;
    if (format == "md") {
        rendered = rubriceval::render_leaderboard_markdown(rows);
    } else if (format == "csv") {
        rendered = rubriceval::render_leaderboard_csv(rows);
    } else if (format == "json") {
        rendered = rubriceval::leaderboard_to_json(rows);
    } else {
        throw rubriceval::InvalidConfig("unknown format \"" + format + "\"");
    }
    write_output(out_path, rendered);
    return 0;
}

int cmd_breakdown(const std::string& run_path, const std::string& axis_label,
                  const std::string& format, const std::string& out_path) {
    const auto axis = rubriceval::breakdown_axis_from_string(axis_label);
    if (!axis) {
        throw rubriceval::InvalidConfig("unknown breakdown axis \"" + axis_label +
                                        "\"");
    }
    const rubriceval::EvaluationRun run = rubriceval::load_run_file(run_path);
    const auto rows = rubriceval::breakdown_report(run, *axis);
    if (format == "md") {
        write_output(out_path, rubriceval::render_breakdown_markdown(rows, *axis));
    } else if (format == "json") {
        njson array = njson::array();
        for (const auto& row : rows) {
            array.push_back(njson{{"axis_value", row.axis_value},
                                  {"mean_rate_pct", row.mean_rate_pct},
                                  {"item_count", row.item_count}});
        }
        write_output(out_path, array.dump(2) + "\n");
    } else {
        throw rubriceval::InvalidConfig("unknown format \"" + format + "\"");
    }
    return 0;
}

int cmd_consistency(const std::string& pairs_path, const std::string& spec_name,
                    bool percent, const std::string& format) {
    const auto pairs = rubriceval::load_score_pairs(pairs_path);
    rubriceval::DeviationSpec spec = spec_name == "sub"
                                         ? rubriceval::DeviationSpec::sub_criterion()
                                         : rubriceval::DeviationSpec::total_score();
    spec.percent_of_range = percent;
    const auto report = rubriceval::build_consistency_report(pairs, spec);
    if (format == "md") {
        std::cout << rubriceval::render_consistency_markdown(report);
    } else {
        std::cout << rubriceval::consistency_report_to_json(report);
    }
    return 0;
}

int cmd_weight_sweep(const std::string& samples_path,
                     const std::vector<std::string>& weight_specs,
                     double tie_epsilon, const std::string& format) {
    const auto samples = rubriceval::load_preference_samples(samples_path);
    std::vector<rubriceval::ScoringConfig> configs;
    std::vector<std::string> specs = weight_specs;
    if (specs.empty()) {
        specs = {"1:1:1:1", "2:1:1:2", "3:1:1:3", "2:1:1:1", "1:1:1:2"};
    }
    for (const auto& spec : specs) {
        rubriceval::ScoringConfig config;
        config.tier_weights = parse_weight_spec(spec);
        configs.push_back(std::move(config));
    }
    const auto rows = rubriceval::weight_sweep(samples, configs, tie_epsilon);
    if (format == "md") {
        std::cout << rubriceval::render_weight_sweep_markdown(rows);
    } else {
        njson array = njson::array();
        for (const auto& row : rows) {
            njson node;
            node["weights"] = row.label;
            node["correct"] = row.outcome.correct;
            node["reversed"] = row.outcome.reversed;
            node["tied"] = row.outcome.tied;
            if (row.outcome.reversed == 0) {
                node["ratio"] = "inf";
            } else {
                node["ratio"] = row.outcome.ratio();
            }
            array.push_back(std::move(node));
        }
        std::cout << array.dump(2) << "\n";
    }
    return 0;
}

int cmd_reward(const std::string& groups_path, double activation_threshold,
               double scale_factor, const std::vector<double>& fusion,
               const std::string& out_path) {
    rubriceval::RewardConfig config;
    if (activation_threshold > 0.0) config.activation_threshold = activation_threshold;
    if (scale_factor > 0.0) config.scale_factor = scale_factor;
    if (!fusion.empty()) {
        if (fusion.size() != 3) {
            throw rubriceval::InvalidConfig("--fusion-weights needs three values");
        }
        config.fusion_weights = {fusion[0], fusion[1], fusion[2]};
    }
    rubriceval::validate_config(config);

    std::ostringstream out;
    for (const auto& group : rubriceval::load_rollout_groups(groups_path)) {
        std::vector<double> scores = group.scores;
        // Fuse per-rollout signals first when the group carries them.
        if (!group.length_penalties.empty() || !group.format_bonuses.empty()) {
            for (std::size_t i = 0; i < scores.size(); ++i) {
                const double length_penalty =
                    group.length_penalties.empty() ? 0.0 : group.length_penalties[i];
                const double format_bonus =
                    group.format_bonuses.empty() ? 0.0 : group.format_bonuses[i];
                scores[i] = rubriceval::fuse_rewards(scores[i], length_penalty,
                                                     format_bonus, config);
            }
        }
        out << rubriceval::shaped_rewards_to_json(
            group.group_id, rubriceval::shape_group(scores, config));
    }
    write_output(out_path, out.str());
    return 0;
}

int cmd_pipeline_run(const std::string& queries_path, const std::string& config_path,
                     const std::string& out_dir, bool stub,
                     int parallelism_override) {
    rubriceval::PipelineConfig config =
        rubriceval::parse_pipeline_config(read_file(config_path));
    if (stub) config.stub_mode = true;
    if (parallelism_override > 0) config.query_parallelism = parallelism_override;
    const auto queries = rubriceval::load_queries(queries_path);
    const rubriceval::PipelineSummary summary =
        rubriceval::run_pipeline(queries, config, out_dir);
    std::cout << "pipeline: " << summary.converged << " converged ("
              << summary.resumed << " resumed), " << summary.needs_review
              << " need review\n";
    if (summary.needs_review > 0) {
        std::cout << "review files are under " << out_dir
                  << "/review; drop <query_id>.corrected.json next to them and "
                     "re-run to resolve\n";
    }
    return 0;
}

int cmd_pipeline_label(const std::string& queries_path,
                       const std::string& config_path, const std::string& out_dir) {
    rubriceval::PipelineConfig config =
        rubriceval::parse_pipeline_config(read_file(config_path));
    const auto queries = rubriceval::load_queries(queries_path);
    rubriceval::PipelineOrchestrator orchestrator(config, out_dir);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
    }
    for (const auto& query : queries) {
        const auto label = orchestrator.label_complexity(query);
        const std::string rendered = rubriceval::complexity_label_to_json(label);
        const std::string out_path =
            out_dir.empty()
                ? ""
                : (fs::path(out_dir) / (query.query_id + ".complexity.json"))
                      .string();
        write_output(out_path, rendered);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rubriceval: rubric-based evaluation of open-ended responses"};
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "check rubric documents");
    std::vector<std::string> validate_paths;
    bool validate_strict = false;
    validate->add_option("paths", validate_paths, "rubric JSON files")->required();
    validate->add_flag("--strict", validate_strict,
                       "enforce generator size and tier-count bounds");

    // score
    auto* score = app.add_subcommand("score", "score one response against one rubric");
    std::string score_rubric, score_response, score_grades;
    bool score_ablation = false;
    ScoringFlags score_scoring;
    JudgeFlags score_judge;
    score->add_option("--rubric", score_rubric, "rubric JSON file")->required();
    score->add_option("--response", score_response, "response text file");
    score->add_option("--grades", score_grades, "pre-computed grade sheet JSON");
    score->add_flag("--ablation", score_ablation,
                    "print the four mechanism-combination scores");
    add_scoring_flags(score, &score_scoring);
    add_judge_flags(score, &score_judge);

    // prompt
    auto* prompt = app.add_subcommand("prompt", "render the judge scoring prompt");
    std::string prompt_rubric, prompt_response, prompt_template;
    prompt->add_option("--rubric", prompt_rubric, "rubric JSON file")->required();
    prompt->add_option("--response", prompt_response, "response text file");
    prompt->add_option("--template", prompt_template, "custom template file");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "batch-evaluate a model");
    std::string eval_rubrics, eval_responses, eval_model, eval_run;
    ScoringFlags eval_scoring;
    JudgeFlags eval_judge;
    evaluate->add_option("--rubrics", eval_rubrics, "directory of rubric JSON files")
        ->required();
    evaluate
        ->add_option("--responses", eval_responses,
                     "directory of <query_id>.txt response files")
        ->required();
    evaluate->add_option("--model", eval_model, "model name under evaluation")
        ->required();
    evaluate->add_option("--run", eval_run, "run file to create or resume")
        ->required();
    add_scoring_flags(evaluate, &eval_scoring);
    add_judge_flags(evaluate, &eval_judge);

    // leaderboard
    auto* leaderboard = app.add_subcommand("leaderboard", "aggregate run files");
    std::vector<std::string> lb_runs;
    std::string lb_sort = "both", lb_format = "md", lb_out;
    std::vector<double> lb_edges;
    leaderboard->add_option("runs", lb_runs, "run files")->required();
    leaderboard->add_option("--sort", lb_sort,
                            "sort key: base|saturation|truncation|both");
    leaderboard->add_option("--format", lb_format, "md|csv|json");
    leaderboard->add_option("--edges", lb_edges,
                            "custom bucket edges on the sort-key percentage");
    leaderboard->add_option("--out", lb_out, "output path (default stdout)");

    // breakdown
    auto* breakdown = app.add_subcommand("breakdown", "per-axis rate report");
    std::string bd_run, bd_axis = "tier", bd_format = "md", bd_out;
    breakdown->add_option("--run", bd_run, "run file")->required();
    breakdown->add_option("--axis", bd_axis, "tier|tag|difficulty|perspective");
    breakdown->add_option("--format", bd_format, "md|json");
    breakdown->add_option("--out", bd_out, "output path (default stdout)");

    // consistency
    auto* consistency =
        app.add_subcommand("consistency", "agreement metrics for score pairs");
    std::string cons_pairs, cons_spec = "total", cons_format = "md";
    bool cons_percent = false;
    consistency->add_option("--pairs", cons_pairs, "score-pair CSV or JSONL file")
        ->required();
    consistency->add_option("--spec", cons_spec, "deviation buckets: total|sub");
    consistency->add_flag("--percent", cons_percent,
                          "thresholds as percent of the declared range");
    consistency->add_option("--format", cons_format, "md|json");

    // weight-sweep
    auto* sweep = app.add_subcommand(
        "weight-sweep", "concordance with human preferences per weight vector");
    std::string sweep_samples, sweep_format = "md";
    std::vector<std::string> sweep_weights;
    double sweep_tie = 1e-9;
    sweep->add_option("--samples", sweep_samples, "preference-sample JSONL file")
        ->required();
    sweep->add_option("--weights", sweep_weights,
                      "E:I:H:P weight specs (repeatable)");
    sweep->add_option("--tie-epsilon", sweep_tie, "score-tie threshold");
    sweep->add_option("--format", sweep_format, "md|json");

    // reward
    auto* reward = app.add_subcommand("reward", "shape grouped rollout scores");
    std::string reward_groups, reward_out;
    double reward_activation = -1.0, reward_scale = -1.0;
    std::vector<double> reward_fusion;
    reward->add_option("--groups", reward_groups, "rollout-group JSONL file")
        ->required();
    reward->add_option("--activation-L", reward_activation,
                       "preference-tie threshold (default 0.05)");
    reward->add_option("--scale-W", reward_scale,
                       "above-mean amplification slope (default 2.0)");
    reward->add_option("--fusion-weights", reward_fusion,
                       "three weights: rubric score, length penalty, format bonus");
    reward->add_option("--out", reward_out, "output path (default stdout)");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "rubric generation pipeline");
    pipeline->require_subcommand(1);
    auto* pipeline_run = pipeline->add_subcommand("run", "run the four stages");
    std::string pl_queries, pl_config, pl_out;
    bool pl_stub = false;
    int pl_parallelism = 0;
    pipeline_run->add_option("--queries", pl_queries, "query JSONL file")->required();
    pipeline_run->add_option("--config", pl_config, "pipeline config JSON")
        ->required();
    pipeline_run->add_option("--out", pl_out, "output directory")->required();
    pipeline_run->add_flag("--stub", pl_stub, "force deterministic stub backends");
    pipeline_run->add_option("--parallelism", pl_parallelism,
                             "queries processed concurrently");
    auto* pipeline_label =
        pipeline->add_subcommand("label", "complexity-label queries");
    std::string lbl_queries, lbl_config, lbl_out;
    pipeline_label->add_option("--queries", lbl_queries, "query JSONL file")
        ->required();
    pipeline_label->add_option("--config", lbl_config, "pipeline config JSON")
        ->required();
    pipeline_label->add_option("--out", lbl_out,
                               "directory for <query_id>.complexity.json files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_paths, validate_strict);
        if (score->parsed()) {
            return cmd_score(score_rubric, score_response, score_grades,
                             score_scoring, score_judge, score_ablation);
        }
        if (prompt->parsed()) {
            return cmd_prompt(prompt_rubric, prompt_response, prompt_template);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_rubrics, eval_responses, eval_model, eval_run,
                                eval_scoring, eval_judge);
        }
        if (leaderboard->parsed()) {
            return cmd_leaderboard(lb_runs, lb_sort, lb_format, lb_edges, lb_out);
        }
        if (breakdown->parsed()) {
            return cmd_breakdown(bd_run, bd_axis, bd_format, bd_out);
        }
        if (consistency->parsed()) {
            return cmd_consistency(cons_pairs, cons_spec, cons_percent, cons_format);
        }
        if (sweep->parsed()) {
            return cmd_weight_sweep(sweep_samples, sweep_weights, sweep_tie,
                                    sweep_format);
        }
        if (reward->parsed()) {
            return cmd_reward(reward_groups, reward_activation, reward_scale,
                              reward_fusion, reward_out);
        }
        if (pipeline->parsed()) {
            if (pipeline_run->parsed()) {
                return cmd_pipeline_run(pl_queries, pl_config, pl_out, pl_stub,
                                        pl_parallelism);
            }
            if (pipeline_label->parsed()) {
                return cmd_pipeline_label(lbl_queries, lbl_config, lbl_out);
            }
        }
    } catch (const rubriceval::Error& e) {
        std::cerr << "rubriceval: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "rubriceval: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

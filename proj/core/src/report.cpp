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

#include "rubriceval/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "internal.hpp"
#include "rubriceval/errors.hpp"

namespace rubriceval {

namespace {

using internal::njson;

constexpr double kRateEpsilon = 1e-9;

const std::array<Tier, 4> kTierOrder = {Tier::kEssential, Tier::kImportant,
                                        Tier::kHighlight, Tier::kPitfall};

long long code_point_count(const std::string& text) {
    long long count = 0;
    for (const unsigned char c : text) {
        if ((c & 0xc0) != 0x80) ++count;  // skip UTF-8 continuation bytes
    }
    return count;
}

}  // namespace

long long word_count(const std::string& text) {
    long long tokens = 0;
    std::size_t first_begin = std::string::npos;
    std::size_t first_end = std::string::npos;
    bool in_token = false;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        const bool space =
            i == text.size() ||
            std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!space && !in_token) {
            in_token = true;
            if (tokens == 0) first_begin = i;
            ++tokens;
        } else if (space && in_token) {
            in_token = false;
            if (tokens == 1) first_end = i;
        }
    }
    if (tokens == 1) {
        const std::string token = text.substr(first_begin, first_end - first_begin);
        if (code_point_count(token) > 20) {
            return code_point_count(token);
        }
    }
    return tokens;
}

// ----- run file records ----- //

namespace {

njson totals_to_node(const std::map<Tier, TierTotals>& totals) {
    njson node;
    for (const Tier tier : kTierOrder) {
        const auto it = totals.find(tier);
        if (it == totals.end()) continue;
        node[to_string(tier)] =
            njson{{"raw", it->second.raw}, {"capacity", it->second.capacity}};
    }
    return node;
}

std::map<Tier, TierTotals> totals_from_node(const njson& node) {
    std::map<Tier, TierTotals> totals;
    for (const auto& [key, value] : node.items()) {
        const auto tier = tier_from_string(key);
        if (!tier) {
            throw SchemaViolation("/totals", "unknown tier \"" + key + "\"");
        }
        totals[*tier] =
            TierTotals{value.value("raw", 0.0), value.value("capacity", 0.0)};
    }
    return totals;
}

}  // namespace

std::string run_meta_to_json(const EvaluationRun& run) {
    njson node;
    node["record"] = "run_meta";
    node["run_id"] = run.run_id;
    node["model"] = run.model_name;
    node["judge"] = run.judge_name;
    node["config"] = njson::parse(scoring_config_to_json(run.config));
    return node.dump() + "\n";
}

std::string query_result_to_json(const QueryResult& result) {
    njson node;
    node["record"] = "query_result";
    node["query_id"] = result.query_id;
    node["response_length"] = result.response_length;
    node["ablation"] = njson{{"base", result.ablation.base},
                             {"with_saturation", result.ablation.with_saturation},
                             {"with_truncation", result.ablation.with_truncation},
                             {"with_both", result.ablation.with_both}};
    node["totals"] = totals_to_node(result.totals);
    njson rates;
    for (const Tier tier : kTierOrder) {
        const auto it = result.rates.find(tier);
        if (it != result.rates.end()) rates[to_string(tier)] = it->second;
    }
    node["rates"] = std::move(rates);
    njson items = njson::array();
    for (const auto& item : result.items) {
        njson entry;
        entry["title"] = item.title;
        entry["tier"] = to_string(item.tier);
        entry["weight"] = item.weight;
        if (item.tag) entry["tag"] = to_string(*item.tag);
        if (item.difficulty) entry["difficulty"] = to_string(*item.difficulty);
        if (item.perspective) entry["perspective"] = to_string(*item.perspective);
        entry["grade"] = item.grade;
        items.push_back(std::move(entry));
    }
    node["items"] = std::move(items);
    return node.dump() + "\n";
}

namespace {

std::string query_error_to_json(const QueryError& error) {
    njson node;
    node["record"] = "query_error";
    node["query_id"] = error.query_id;
    node["error"] = error.error;
    return node.dump() + "\n";
}

QueryResult query_result_from_node(const njson& node) {
    QueryResult result;
    result.query_id = node.value("query_id", "");
    result.response_length = node.value("response_length", 0LL);
    if (node.contains("ablation")) {
        const auto& ab = node["ablation"];
        result.ablation.base = ab.value("base", 0.0);
        result.ablation.with_saturation = ab.value("with_saturation", 0.0);
        result.ablation.with_truncation = ab.value("with_truncation", 0.0);
        result.ablation.with_both = ab.value("with_both", 0.0);
    }
    if (node.contains("totals")) {
        result.totals = totals_from_node(node["totals"]);
    }
    if (node.contains("rates")) {
        for (const auto& [key, value] : node["rates"].items()) {
            const auto tier = tier_from_string(key);
            if (!tier) {
                throw SchemaViolation("/rates", "unknown tier \"" + key + "\"");
            }
            result.rates[*tier] = value.get<double>();
        }
    }
    if (node.contains("items")) {
        for (const auto& entry : node["items"]) {
            ItemResult item;
            item.title = entry.value("title", "");
            const auto tier = tier_from_string(entry.value("tier", ""));
            if (!tier) {
                throw SchemaViolation("/items", "unknown tier on item \"" +
                                                    item.title + "\"");
            }
            item.tier = *tier;
            item.weight = entry.value("weight", 1.0);
            if (entry.contains("tag")) {
                item.tag = capability_tag_from_string(entry["tag"].get<std::string>());
            }
            if (entry.contains("difficulty")) {
                item.difficulty =
                    difficulty_from_string(entry["difficulty"].get<std::string>());
            }
            if (entry.contains("perspective")) {
                item.perspective =
                    perspective_from_string(entry["perspective"].get<std::string>());
            }
            item.grade = entry.value("grade", 0.0);
            result.items.push_back(std::move(item));
        }
    }
    return result;
}

}  // namespace

EvaluationRun load_run_file(const std::string& path) {
    const std::string content = internal::read_file(path);
    EvaluationRun run;
    bool meta_seen = false;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        njson node;
        try {
            node = njson::parse(line);
        } catch (const njson::parse_error& e) {
            throw MalformedDocument(path + ":" + std::to_string(line_no) + ": " +
                                    e.what());
        }
        const std::string record = node.value("record", "");
        if (record == "run_meta") {
            if (!meta_seen) {
                run.run_id = node.value("run_id", "");
                run.model_name = node.value("model", "");
                run.judge_name = node.value("judge", "");
                if (node.contains("config")) {
                    run.config = parse_scoring_config(node["config"].dump());
                }
                meta_seen = true;
            }
        } else if (record == "query_result") {
            run.results.push_back(query_result_from_node(node));
        } else if (record == "query_error") {
            run.errors.push_back(QueryError{node.value("query_id", ""),
                                            node.value("error", "")});
        } else {
            throw SchemaViolation(path + ":" + std::to_string(line_no),
                                  "unknown record type \"" + record + "\"");
        }
    }
    if (!meta_seen) {
        throw SchemaViolation(path, "run file has no run_meta record");
    }
    return run;
}

EvaluationRun evaluate_batch(const std::string& run_path,
                             const std::string& model_name,
                             const std::string& judge_name,
                             const std::vector<CorpusEntry>& corpus,
                             const JudgeFn& judge, const ScoringConfig& config) {
    validate_config(config);
    EvaluationRun run;
    std::set<std::string> done;
    if (internal::file_exists(run_path)) {
        run = load_run_file(run_path);
        if (run.model_name != model_name) {
            throw InvalidConfig("run file " + run_path + " belongs to model \"" +
                                run.model_name + "\", not \"" + model_name + "\"");
        }
        if (run.config != config) {
            throw InvalidConfig("run file " + run_path +
                                " was produced under a different scoring config");
        }
        for (const auto& result : run.results) done.insert(result.query_id);
        for (const auto& error : run.errors) done.insert(error.query_id);
    } else {
        run.run_id = [&] {
            char buf[24];
            std::snprintf(buf, sizeof(buf), "run-%016llx",
                          static_cast<unsigned long long>(internal::hash_string(
                              model_name + "|" + judge_name, 0)));
            return std::string(buf);
        }();
        run.model_name = model_name;
        run.judge_name = judge_name;
        run.config = config;
        internal::write_file(run_path, run_meta_to_json(run));
    }

    for (const auto& entry : corpus) {
        const std::string& query_id = entry.rubric.query_id;
        if (query_id.empty()) {
            throw InvalidConfig("corpus rubric without a query_id");
        }
        if (done.count(query_id) > 0) continue;
        done.insert(query_id);
        try {
            const GradeSheet sheet = judge(entry.rubric, entry.response);
            const ScoreBreakdown breakdown =
                weighted_score(entry.rubric, sheet, config);
            QueryResult result;
            result.query_id = query_id;
            result.response_length = word_count(entry.response);
            result.ablation = ablation_suite(entry.rubric, sheet, config);
            result.totals = breakdown.totals;
            result.rates = breakdown.rates;
            for (const auto& item : entry.rubric.items) {
                ItemResult record;
                record.title = item.title;
                record.tier = item.tier;
                record.weight = item.weight;
                record.tag = item.tag;
                record.difficulty = item.difficulty;
                record.perspective = item.perspective;
                const auto it = sheet.grades.find(item.title);
                record.grade = it == sheet.grades.end() ? 0.0 : it->second;
                result.items.push_back(std::move(record));
            }
            internal::append_file(run_path, query_result_to_json(result));
            run.results.push_back(std::move(result));
        } catch (const Error& e) {
            QueryError error{query_id, e.what()};
            internal::append_file(run_path, query_error_to_json(error));
            run.errors.push_back(std::move(error));
        }
    }
    return run;
}

// ----- leaderboard ----- //

namespace {

double sort_key_value(const LeaderboardRow& row, LeaderboardSortKey key) {
    switch (key) {
        case LeaderboardSortKey::kBase: return row.base_pct;
        case LeaderboardSortKey::kSaturation: return row.saturation_pct;
        case LeaderboardSortKey::kTruncation: return row.truncation_pct;
        case LeaderboardSortKey::kBoth: return row.both_pct;
    }
    return row.both_pct;
}

}  // namespace

std::vector<LeaderboardRow> build_leaderboard(
    const std::vector<EvaluationRun>& runs, const LeaderboardOptions& options) {
    std::vector<LeaderboardRow> rows;
    rows.reserve(runs.size());
    for (const auto& run : runs) {
        LeaderboardRow row;
        row.model = run.model_name;
        row.queries = run.results.size();
        row.errors = run.errors.size();
        if (!run.results.empty()) {
            const double n = static_cast<double>(run.results.size());
            double base = 0.0, sat = 0.0, trunc = 0.0, both = 0.0, length = 0.0;
            std::map<Tier, double> rate_sums;
            for (const auto& result : run.results) {
                base += result.ablation.base;
                sat += result.ablation.with_saturation;
                trunc += result.ablation.with_truncation;
                both += result.ablation.with_both;
                length += static_cast<double>(result.response_length);
                for (const auto& [tier, rate] : result.rates) {
                    rate_sums[tier] += rate;
                }
            }
            row.avg_length = length / n;
            row.base_pct = 100.0 * base / n;
            row.saturation_pct = 100.0 * sat / n;
            row.truncation_pct = 100.0 * trunc / n;
            row.both_pct = 100.0 * both / n;
            for (const auto& [tier, sum] : rate_sums) {
                row.tier_rates_pct[tier] = 100.0 * sum / n;
            }
        }
        // Each mechanism can only lower a score, so the averages must obey
        // both <= min(sat, trunc) and each of sat, trunc <= base up to
        // rounding noise.
        const double mechanism_min =
            std::min(row.saturation_pct, row.truncation_pct);
        const double mechanism_max =
            std::max(row.saturation_pct, row.truncation_pct);
        if (row.both_pct > mechanism_min + kRateEpsilon ||
            mechanism_max > row.base_pct + kRateEpsilon) {
            throw ReportInvariantViolation(
                "model \"" + row.model + "\": both=" +
                internal::fixed(row.both_pct, 6) + " sat=" +
                internal::fixed(row.saturation_pct, 6) + " trunc=" +
                internal::fixed(row.truncation_pct, 6) + " base=" +
                internal::fixed(row.base_pct, 6));
        }
        rows.push_back(std::move(row));
    }

    const LeaderboardSortKey key = options.sort_key;
    std::sort(rows.begin(), rows.end(),
              [key](const LeaderboardRow& a, const LeaderboardRow& b) {
                  const double sa = sort_key_value(a, key);
                  const double sb = sort_key_value(b, key);
                  if (sa != sb) return sa > sb;
                  return a.model < b.model;
              });

    if (!options.bucket_edges.empty()) {
        std::vector<double> edges = options.bucket_edges;
        std::sort(edges.begin(), edges.end(), std::greater<double>());
        for (auto& row : rows) {
            int bucket = 1;
            for (const double edge : edges) {
                if (sort_key_value(row, key) < edge) ++bucket;
            }
            row.bucket = bucket;
        }
    } else if (!rows.empty()) {
        const double top = sort_key_value(rows.front(), key);
        const double bottom = sort_key_value(rows.back(), key);
        const double span = top - bottom;
        for (auto& row : rows) {
            if (span <= 0.0) {
                row.bucket = 1;
                continue;
            }
            const int bucket =
                1 + static_cast<int>((top - sort_key_value(row, key)) / span * 10.0);
            row.bucket = std::min(bucket, 10);
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].rank = static_cast<int>(i) + 1;
    }
    return rows;
}

namespace {

bool out_of_range(double pct) { return pct < 0.0 || pct > 100.0; }

// Renders a percentage at two decimals; out-of-range values get a marker
// instead of being clamped.
std::string pct_cell(double pct, bool* any_marked) {
    std::string text = internal::fixed(pct, 2);
    if (out_of_range(pct)) {
        text += "*";
        if (any_marked != nullptr) *any_marked = true;
    }
    return text;
}

double tier_rate_or_zero(const LeaderboardRow& row, Tier tier) {
    const auto it = row.tier_rates_pct.find(tier);
    return it == row.tier_rates_pct.end() ? 0.0 : it->second;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

std::string render_leaderboard_markdown(const std::vector<LeaderboardRow>& rows) {
    std::ostringstream out;
    out << "| Rank | Model | Bucket | Avg Words | Base | +Saturation "
           "| +Truncation | +Both | Essential | Important | Highlight "
           "| Pitfall | Queries | Errors |\n";
    out << "|---:|:---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|"
           "---:|---:|\n";
    bool any_marked = false;
    for (const auto& row : rows) {
        out << "| " << row.rank << " | " << row.model << " | B" << row.bucket
            << " | " << internal::fixed(row.avg_length, 2) << " | "
            << pct_cell(row.base_pct, &any_marked) << " | "
            << pct_cell(row.saturation_pct, &any_marked) << " | "
            << pct_cell(row.truncation_pct, &any_marked) << " | "
            << pct_cell(row.both_pct, &any_marked) << " | "
            << pct_cell(tier_rate_or_zero(row, Tier::kEssential), &any_marked)
            << " | "
            << pct_cell(tier_rate_or_zero(row, Tier::kImportant), &any_marked)
            << " | "
            << pct_cell(tier_rate_or_zero(row, Tier::kHighlight), &any_marked)
            << " | "
            << pct_cell(tier_rate_or_zero(row, Tier::kPitfall), &any_marked)
            << " | " << row.queries << " | " << row.errors << " |\n";
    }
    if (any_marked) {
        out << "\n\\* outside the nominal [0, 100] range (unclamped scores can "
               "exceed the bounds).\n";
    }
    return out.str();
}

std::string render_leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
    std::ostringstream out;
    out << "rank,model,bucket,avg_words,base_pct,saturation_pct,truncation_pct,"
           "both_pct,essential_pct,important_pct,highlight_pct,pitfall_pct,"
           "queries,errors\n";
    for (const auto& row : rows) {
        out << row.rank << "," << csv_escape(row.model) << "," << row.bucket
            << "," << internal::fixed(row.avg_length, 2) << ","
            << internal::fixed(row.base_pct, 2) << ","
            << internal::fixed(row.saturation_pct, 2) << ","
            << internal::fixed(row.truncation_pct, 2) << ","
            << internal::fixed(row.both_pct, 2) << ","
            << internal::fixed(tier_rate_or_zero(row, Tier::kEssential), 2) << ","
            << internal::fixed(tier_rate_or_zero(row, Tier::kImportant), 2) << ","
            << internal::fixed(tier_rate_or_zero(row, Tier::kHighlight), 2) << ","
            << internal::fixed(tier_rate_or_zero(row, Tier::kPitfall), 2) << ","
            << row.queries << "," << row.errors << "\n";
    }
    return out.str();
}

std::string leaderboard_to_json(const std::vector<LeaderboardRow>& rows) {
    njson array = njson::array();
    for (const auto& row : rows) {
        njson node;
        node["rank"] = row.rank;
        node["model"] = row.model;
        node["bucket"] = row.bucket;
        node["avg_words"] = row.avg_length;
        node["base_pct"] = row.base_pct;
        node["saturation_pct"] = row.saturation_pct;
        node["truncation_pct"] = row.truncation_pct;
        node["both_pct"] = row.both_pct;
        njson rates;
        for (const Tier tier : kTierOrder) {
            rates[to_string(tier)] = tier_rate_or_zero(row, tier);
        }
        node["tier_rates_pct"] = std::move(rates);
        node["queries"] = row.queries;
        node["errors"] = row.errors;
        array.push_back(std::move(node));
    }
    return array.dump(2) + "\n";
}

// ----- breakdowns ----- //

std::optional<BreakdownAxis> breakdown_axis_from_string(const std::string& label) {
    const std::string norm = internal::normalize_key(label);
    if (norm == "tier") return BreakdownAxis::kTier;
    if (norm == "tag" || norm == "capabilitytag") return BreakdownAxis::kTag;
    if (norm == "difficulty") return BreakdownAxis::kDifficulty;
    if (norm == "perspective") return BreakdownAxis::kPerspective;
    return std::nullopt;
}

namespace {

const char* axis_name(BreakdownAxis axis) {
    switch (axis) {
        case BreakdownAxis::kTier: return "Tier";
        case BreakdownAxis::kTag: return "Capability";
        case BreakdownAxis::kDifficulty: return "Difficulty";
        case BreakdownAxis::kPerspective: return "Perspective";
    }
    return "Axis";
}

// Axis value of one item; nullopt when the item carries no label on the axis.
std::optional<std::string> axis_value(const ItemResult& item, BreakdownAxis axis) {
    switch (axis) {
        case BreakdownAxis::kTier:
            return to_string(item.tier);
        case BreakdownAxis::kTag:
            if (!item.tag) return std::nullopt;
            return to_string(*item.tag);
        case BreakdownAxis::kDifficulty:
            if (!item.difficulty) return std::nullopt;
            return to_string(*item.difficulty);
        case BreakdownAxis::kPerspective:
            if (!item.perspective) return std::nullopt;
            return to_string(*item.perspective);
    }
    return std::nullopt;
}

// Canonical row order per axis, unlabeled bucket last.
std::vector<std::string> axis_order(BreakdownAxis axis) {
    std::vector<std::string> order;
    switch (axis) {
        case BreakdownAxis::kTier:
            for (const Tier tier : kTierOrder) order.push_back(to_string(tier));
            break;
        case BreakdownAxis::kTag:
            for (int i = 0; i <= static_cast<int>(CapabilityTag::kContextualCoreference);
                 ++i) {
                order.push_back(to_string(static_cast<CapabilityTag>(i)));
            }
            break;
        case BreakdownAxis::kDifficulty:
            for (int i = 0; i <= static_cast<int>(DifficultyLabel::kExpert); ++i) {
                order.push_back(to_string(static_cast<DifficultyLabel>(i)));
            }
            break;
        case BreakdownAxis::kPerspective:
            for (int i = 0; i <= static_cast<int>(PerspectiveLabel::kBreadth); ++i) {
                order.push_back(to_string(static_cast<PerspectiveLabel>(i)));
            }
            break;
    }
    return order;
}

}  // namespace

std::vector<BreakdownRow> breakdown_report(const EvaluationRun& run,
                                           BreakdownAxis axis) {
    std::map<std::string, std::pair<double, std::size_t>> sums;  // value -> (sum, n)
    std::size_t unlabeled_count = 0;
    double unlabeled_sum = 0.0;
    for (const auto& result : run.results) {
        for (const auto& item : result.items) {
            const auto value = axis_value(item, axis);
            if (!value) {
                unlabeled_sum += item.grade;
                ++unlabeled_count;
                continue;
            }
            auto& slot = sums[*value];
            slot.first += item.grade;
            slot.second += 1;
        }
    }
    std::vector<BreakdownRow> rows;
    for (const auto& value : axis_order(axis)) {
        const auto it = sums.find(value);
        if (it == sums.end()) continue;
        BreakdownRow row;
        row.axis_value = value;
        row.item_count = it->second.second;
        row.mean_rate_pct =
            100.0 * it->second.first / static_cast<double>(it->second.second);
        rows.push_back(std::move(row));
    }
    if (unlabeled_count > 0) {
        BreakdownRow row;
        row.axis_value = "(unlabeled)";
        row.item_count = unlabeled_count;
        row.mean_rate_pct =
            100.0 * unlabeled_sum / static_cast<double>(unlabeled_count);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_breakdown_markdown(const std::vector<BreakdownRow>& rows,
                                      BreakdownAxis axis) {
    std::ostringstream out;
    out << "| " << axis_name(axis) << " | Mean Rate | Items |\n";
    out << "|:---|---:|---:|\n";
    for (const auto& row : rows) {
        out << "| " << row.axis_value << " | "
            << internal::fixed(row.mean_rate_pct, 2) << " | " << row.item_count
            << " |\n";
    }
    return out.str();
}

LengthStats length_stats(const EvaluationRun& run) {
    LengthStats stats;
    if (run.results.empty()) return stats;
    std::vector<long long> lengths;
    lengths.reserve(run.results.size());
    double sum = 0.0;
    for (const auto& result : run.results) {
        lengths.push_back(result.response_length);
        sum += static_cast<double>(result.response_length);
    }
    std::sort(lengths.begin(), lengths.end());
    stats.n = lengths.size();
    stats.mean = sum / static_cast<double>(lengths.size());
    const std::size_t n = lengths.size();
    stats.median = n % 2 == 1 ? static_cast<double>(lengths[n / 2])
                              : 0.5 * static_cast<double>(lengths[n / 2 - 1] +
                                                          lengths[n / 2]);
    stats.min = lengths.front();
    stats.max = lengths.back();
    return stats;
}

}  // namespace rubriceval

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

#include "rubriceval/consistency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "internal.hpp"
#include "rubriceval/errors.hpp"
#include "rubriceval/rubric_io.hpp"

namespace rubriceval {

namespace {

using internal::fixed;
using internal::njson;

constexpr DeviationTier kAllDeviationTiers[] = {
    DeviationTier::kComplete, DeviationTier::kAcceptable,
    DeviationTier::kModerate, DeviationTier::kSevere};

// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction;
// standard numeric recipe, good to ~1e-12 over the needed domain.
double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const bool swap = x > (a + 1.0) / (a + b + 2.0);
    if (swap) {
        return 1.0 - incomplete_beta(b, a, 1.0 - x);
    }
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-14;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double result = d;
    for (int m = 1; m <= 300; ++m) {
        const double m_d = m;
        double numerator = m_d * (b - m_d) * x / ((a + 2.0 * m_d - 1.0) * (a + 2.0 * m_d));
        d = 1.0 + numerator * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + numerator / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        result *= d * c;
        numerator = -(a + m_d) * (a + b + m_d) * x /
                    ((a + 2.0 * m_d) * (a + 2.0 * m_d + 1.0));
        d = 1.0 + numerator * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + numerator / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        result *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::exp(ln_front) * result / a;
}

void validate_spec(const DeviationSpec& spec) {
    if (!(spec.complete_max < spec.acceptable_max) ||
        !(spec.acceptable_max < spec.severe_min) || !(spec.complete_max >= 0.0)) {
        throw InvalidConfig("deviation thresholds must be 0 <= complete < acceptable < severe");
    }
    if (spec.percent_of_range && !(spec.range_max > spec.range_min)) {
        throw InvalidConfig("percent mode needs a non-empty score range");
    }
}

std::string weight_label(const ScoringConfig& config) {
    const auto part = [](double w) {
        if (w == std::floor(w)) {
            return std::to_string(static_cast<long long>(w));
        }
        return fixed(w, 2);
    };
    return part(config.tier_weights.at(Tier::kEssential)) + ":" +
           part(config.tier_weights.at(Tier::kImportant)) + ":" +
           part(config.tier_weights.at(Tier::kHighlight)) + ":" +
           part(config.tier_weights.at(Tier::kPitfall));
}

njson report_to_njson(const ConsistencyReport& report) {
    njson doc;
    doc["n"] = report.n;
    doc["mae"] = report.mae;
    if (report.pearson) {
        doc["pearson_r"] = *report.pearson;
    } else {
        doc["pearson_r"] = nullptr;
    }
    if (report.p_value) {
        doc["pearson_p"] = *report.p_value;
    } else {
        doc["pearson_p"] = nullptr;
    }
    njson histogram;
    for (const DeviationTier t : kAllDeviationTiers) {
        const auto count_it = report.histogram.counts.find(t);
        const auto frac_it = report.histogram.fractions.find(t);
        histogram[to_string(t)] = {
            {"count", count_it == report.histogram.counts.end() ? 0 : count_it->second},
            {"fraction",
             frac_it == report.histogram.fractions.end() ? 0.0 : frac_it->second}};
    }
    doc["histogram"] = std::move(histogram);
    if (!report.dimensions.empty()) {
        njson dims;
        for (const auto& [tier, sub] : report.dimensions) {
            dims[to_string(tier)] = report_to_njson(sub);
        }
        doc["dimensions"] = std::move(dims);
    }
    return doc;
}

void render_report_row(std::ostringstream& out, const std::string& scope,
                       const ConsistencyReport& report) {
    const auto pct = [&report](DeviationTier t) {
        const auto it = report.histogram.fractions.find(t);
        const double f = it == report.histogram.fractions.end() ? 0.0 : it->second;
        return fixed(100.0 * f, 2);
    };
    out << "| " << scope << " | " << pct(DeviationTier::kComplete) << " | "
        << pct(DeviationTier::kAcceptable) << " | " << pct(DeviationTier::kModerate)
        << " | " << pct(DeviationTier::kSevere) << " | " << fixed(report.mae, 4)
        << " | " << (report.pearson ? fixed(*report.pearson, 4) : std::string("-"))
        << " |\n";
}

ScorePair pair_from_json(const njson& node, const std::string& context) {
    if (!node.is_object()) {
        throw SchemaViolation(context, "score pair must be an object");
    }
    ScorePair pair;
    pair.sample_id = node.value("sample_id", "");
    if (!node.contains("scorer_a") || !node.contains("scorer_b") ||
        !node["scorer_a"].is_number() || !node["scorer_b"].is_number()) {
        throw SchemaViolation(context, "score pair needs numeric scorer_a/scorer_b");
    }
    pair.scorer_a = node["scorer_a"].get<double>();
    pair.scorer_b = node["scorer_b"].get<double>();
    if (node.contains("dimensions")) {
        const njson& dims = node["dimensions"];
        if (!dims.is_object()) {
            throw SchemaViolation(context + "/dimensions", "must be an object");
        }
        for (const auto& [key, value] : dims.items()) {
            const auto tier = tier_from_string(key);
            if (!tier || !value.is_object() || !value.contains("a") ||
                !value.contains("b")) {
                throw SchemaViolation(context + "/dimensions/" + key,
                                      "expected tier -> {\"a\": n, \"b\": n}");
            }
            pair.by_dimension[*tier] = {value["a"].get<double>(),
                                        value["b"].get<double>()};
        }
    }
    return pair;
}

}  // namespace

const std::string& to_string(DeviationTier t) {
    static const std::array<std::string, 4> kNames = {"Complete", "Acceptable",
                                                      "Moderate", "Severe"};
    return kNames[static_cast<std::size_t>(t)];
}

DeviationSpec DeviationSpec::total_score() { return DeviationSpec{}; }

DeviationSpec DeviationSpec::sub_criterion() {
    DeviationSpec spec;
    spec.complete_max = 1.0;
    spec.acceptable_max = 2.0;
    spec.severe_min = 3.0;
    return spec;
}

DeviationTier classify_deviation(double delta, const DeviationSpec& spec) {
    validate_spec(spec);
    double scale = 1.0;
    if (spec.percent_of_range) {
        scale = (spec.range_max - spec.range_min) / 100.0;
    }
    const double magnitude = std::fabs(delta);
    if (magnitude <= spec.complete_max * scale) return DeviationTier::kComplete;
    if (magnitude <= spec.acceptable_max * scale) return DeviationTier::kAcceptable;
    if (magnitude <= spec.severe_min * scale) return DeviationTier::kModerate;
    return DeviationTier::kSevere;
}

double mean_absolute_error(const std::vector<ScorePair>& pairs) {
    if (pairs.empty()) {
        throw InvalidConfig("mean_absolute_error needs at least one pair");
    }
    double sum = 0.0;
    for (const auto& pair : pairs) {
        sum += std::fabs(pair.scorer_a - pair.scorer_b);
    }
    return sum / static_cast<double>(pairs.size());
}

double pearson_r(const std::vector<ScorePair>& pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) {
        throw InvalidConfig("pearson_r needs at least two pairs");
    }
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (const auto& pair : pairs) {
        mean_a += pair.scorer_a;
        mean_b += pair.scorer_b;
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (const auto& pair : pairs) {
        const double da = pair.scorer_a - mean_a;
        const double db = pair.scorer_b - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) {
        throw InvalidConfig("pearson_r undefined: a scorer has zero variance");
    }
    return cov / std::sqrt(var_a * var_b);
}

double pearson_p_value(double r, std::size_t n) {
    if (n < 3) {
        throw InvalidConfig("pearson_p_value needs n >= 3");
    }
    const double df = static_cast<double>(n - 2);
    if (std::fabs(r) >= 1.0) return 0.0;
    const double t2 = r * r * df / (1.0 - r * r);
    // Two-sided p under Student's t: I_{df/(df+t^2)}(df/2, 1/2).
    return incomplete_beta(df / 2.0, 0.5, df / (df + t2));
}

ConsistencyReport build_consistency_report(const std::vector<ScorePair>& pairs,
                                           const DeviationSpec& spec,
                                           const DeviationSpec& dimension_spec) {
    if (pairs.empty()) {
        throw InvalidConfig("consistency report needs at least one pair");
    }
    ConsistencyReport report;
    report.n = pairs.size();
    report.mae = mean_absolute_error(pairs);
    try {
        report.pearson = pearson_r(pairs);
        if (pairs.size() >= 3) {
            report.p_value = pearson_p_value(*report.pearson, pairs.size());
        }
    } catch (const InvalidConfig&) {
        report.pearson.reset();
    }
    for (const DeviationTier t : kAllDeviationTiers) {
        report.histogram.counts[t] = 0;
    }
    for (const auto& pair : pairs) {
        ++report.histogram.counts[classify_deviation(pair.scorer_a - pair.scorer_b,
                                                     spec)];
    }
    for (const DeviationTier t : kAllDeviationTiers) {
        report.histogram.fractions[t] =
            static_cast<double>(report.histogram.counts[t]) /
            static_cast<double>(report.n);
    }

    for (const Tier tier : {Tier::kEssential, Tier::kImportant, Tier::kHighlight,
                            Tier::kPitfall}) {
        std::vector<ScorePair> dimension_pairs;
        for (const auto& pair : pairs) {
            const auto it = pair.by_dimension.find(tier);
            if (it == pair.by_dimension.end()) continue;
            ScorePair flat;
            flat.sample_id = pair.sample_id;
            flat.scorer_a = it->second.first;
            flat.scorer_b = it->second.second;
            dimension_pairs.push_back(std::move(flat));
        }
        if (!dimension_pairs.empty()) {
            report.dimensions[tier] = build_consistency_report(
                dimension_pairs, dimension_spec, dimension_spec);
        }
    }
    return report;
}

std::string consistency_report_to_json(const ConsistencyReport& report) {
    return report_to_njson(report).dump(2) + "\n";
}

std::string render_consistency_markdown(const ConsistencyReport& report) {
    std::ostringstream out;
    out << "| Scope | Complete (%) | Acceptable (%) | Moderate (%) | Severe (%) "
           "| MAE | Pearson r |\n";
    out << "| --- | --- | --- | --- | --- | --- | --- |\n";
    render_report_row(out, "Total", report);
    for (const auto& [tier, sub] : report.dimensions) {
        render_report_row(out, to_string(tier), sub);
    }
    return out.str();
}

std::vector<ScorePair> load_score_pairs(const std::string& path) {
    const std::string content = internal::read_file(path);
    std::vector<ScorePair> pairs;
    const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string context = path + ":" + std::to_string(line_no);
        if (csv) {
            if (!header_skipped) {
                header_skipped = true;  // header row: sample_id,scorer_a,scorer_b
                continue;
            }
            std::istringstream fields(line);
            ScorePair pair;
            std::string a;
            std::string b;
            if (!std::getline(fields, pair.sample_id, ',') ||
                !std::getline(fields, a, ',') || !std::getline(fields, b, ',')) {
                throw MalformedDocument(context + ": expected sample_id,scorer_a,scorer_b");
            }
            try {
                pair.scorer_a = std::stod(a);
                pair.scorer_b = std::stod(b);
            } catch (const std::exception&) {
                throw MalformedDocument(context + ": non-numeric score");
            }
            pairs.push_back(std::move(pair));
        } else {
            njson node;
            try {
                node = njson::parse(line);
            } catch (const njson::parse_error& e) {
                throw MalformedDocument(context + ": " + e.what());
            }
            pairs.push_back(pair_from_json(node, context));
        }
    }
    return pairs;
}

double ConcordanceOutcome::ratio() const {
    if (reversed == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(correct) / static_cast<double>(reversed);
}

ConcordanceOutcome concordance_ratio(
    const std::vector<PairwisePreferenceSample>& samples,
    const ScoringConfig& config, double tie_epsilon) {
    if (!(tie_epsilon >= 0.0)) {
        throw InvalidConfig("tie_epsilon must be >= 0");
    }
    ConcordanceOutcome outcome;
    for (const auto& sample : samples) {
        const double score_a =
            weighted_score(sample.rubric, sample.grades_a, config).overall;
        const double score_b =
            weighted_score(sample.rubric, sample.grades_b, config).overall;
        const double delta = score_a - score_b;
        if (std::fabs(delta) < tie_epsilon) {
            ++outcome.tied;
            continue;
        }
        const bool engine_prefers_a = delta > 0.0;
        const bool human_prefers_a = sample.human_preference == Preference::kA;
        if (engine_prefers_a == human_prefers_a) {
            ++outcome.correct;
        } else {
            ++outcome.reversed;
        }
    }
    return outcome;
}

std::vector<WeightSweepRow> weight_sweep(
    const std::vector<PairwisePreferenceSample>& samples,
    const std::vector<ScoringConfig>& configs, double tie_epsilon) {
    std::vector<WeightSweepRow> rows;
    rows.reserve(configs.size());
    for (const auto& config : configs) {
        WeightSweepRow row;
        row.label = weight_label(config);
        row.config = config;
        row.outcome = concordance_ratio(samples, config, tie_epsilon);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_weight_sweep_markdown(const std::vector<WeightSweepRow>& rows) {
    std::ostringstream out;
    out << "| Weights (E:I:H:P) | Correct | Reversed | Tied | Correct:Reversed |\n";
    out << "| --- | --- | --- | --- | --- |\n";
    for (const auto& row : rows) {
        out << "| " << row.label << " | " << row.outcome.correct << " | "
            << row.outcome.reversed << " | " << row.outcome.tied << " | ";
        if (row.outcome.reversed == 0) {
            out << "inf";
        } else {
            out << fixed(row.outcome.ratio(), 2) << ":1";
        }
        out << " |\n";
    }
    return out.str();
}

std::vector<PairwisePreferenceSample> load_preference_samples(
    const std::string& path) {
    const std::string content = internal::read_file(path);
    std::vector<PairwisePreferenceSample> samples;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string context = path + ":" + std::to_string(line_no);
        njson node;
        try {
            node = njson::parse(line);
        } catch (const njson::parse_error& e) {
            throw MalformedDocument(context + ": " + e.what());
        }
        if (!node.is_object() || !node.contains("rubric") ||
            !node.contains("grades_a") || !node.contains("grades_b")) {
            throw SchemaViolation(context,
                                  "sample needs rubric, grades_a and grades_b");
        }
        PairwisePreferenceSample sample;
        sample.query_id = node.value("query_id", "");
        const std::string pref = node.value("human_preference", "A");
        if (pref == "A") {
            sample.human_preference = Preference::kA;
        } else if (pref == "B") {
            sample.human_preference = Preference::kB;
        } else {
            throw SchemaViolation(context + "/human_preference",
                                  "must be \"A\" or \"B\"");
        }
        sample.rubric = parse_rubric_set(node["rubric"].dump());
        sample.grades_a = parse_grade_sheet(node["grades_a"].dump());
        sample.grades_b = parse_grade_sheet(node["grades_b"].dump());
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::string preference_sample_to_json(const PairwisePreferenceSample& sample) {
    njson doc;
    doc["query_id"] = sample.query_id;
    doc["human_preference"] = sample.human_preference == Preference::kA ? "A" : "B";
    doc["rubric"] = njson::parse(rubric_set_to_json(sample.rubric));
    doc["grades_a"] = njson::parse(grade_sheet_to_json(sample.grades_a));
    doc["grades_b"] = njson::parse(grade_sheet_to_json(sample.grades_b));
    return doc.dump();
}

}  // namespace rubriceval

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

#include "rubriceval/reward.hpp"

#include <cmath>
#include <sstream>

#include "internal.hpp"
#include "rubriceval/errors.hpp"

namespace rubriceval {

namespace {
using internal::njson;
}

void validate_config(const RewardConfig& config) {
    if (!(config.activation_threshold > 0.0)) {
        throw InvalidConfig("activation_threshold must be positive");
    }
    if (!(config.scale_factor >= 1.0)) {
        throw InvalidConfig("scale_factor must be >= 1");
    }
    double sum = 0.0;
    for (const double w : config.fusion_weights) {
        if (w < 0.0) {
            throw InvalidConfig("fusion weights must be >= 0");
        }
        sum += w;
    }
    if (!(sum > 0.0)) {
        throw InvalidConfig("fusion weights must not all be zero");
    }
}

bool activation_equal(double score_a, double score_b, const RewardConfig& config) {
    validate_config(config);
    return std::fabs(score_a - score_b) < config.activation_threshold;
}

double group_mean(const std::vector<double>& scores) {
    if (scores.empty()) {
        throw InvalidConfig("group_mean needs a non-empty group");
    }
    double sum = 0.0;
    for (const double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
}

double scale_reward(double rollout_score, double mean, const RewardConfig& config) {
    validate_config(config);
    if (rollout_score < mean) {
        return rollout_score;
    }
    return mean + config.scale_factor * (rollout_score - mean);
}

double fuse_rewards(double rubric_score, double length_penalty,
                    double format_bonus, const RewardConfig& config) {
    validate_config(config);
    const double sum = config.fusion_weights[0] + config.fusion_weights[1] +
                       config.fusion_weights[2];
    return (config.fusion_weights[0] * rubric_score +
            config.fusion_weights[1] * length_penalty +
            config.fusion_weights[2] * format_bonus) /
           sum;
}

std::vector<ShapedReward> shape_group(const std::vector<double>& scores,
                                      const RewardConfig& config) {
    validate_config(config);
    const double mean = group_mean(scores);
    std::vector<ShapedReward> shaped;
    shaped.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        ShapedReward reward;
        reward.raw = scores[i];
        reward.mean = mean;
        reward.scaled = scale_reward(scores[i], mean, config);
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (j == i) continue;
            if (std::fabs(scores[i] - scores[j]) < config.activation_threshold) {
                reward.equal_to.push_back(j);
            }
        }
        shaped.push_back(std::move(reward));
    }
    return shaped;
}

std::vector<RolloutGroup> load_rollout_groups(const std::string& path) {
    const std::string content = internal::read_file(path);
    std::vector<RolloutGroup> groups;
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
        if (!node.is_object() || !node.contains("scores") ||
            !node["scores"].is_array()) {
            throw SchemaViolation(context, "rollout group needs a scores array");
        }
        RolloutGroup group;
        group.group_id = node.value("group_id", "");
        for (const auto& value : node["scores"]) {
            if (!value.is_number()) {
                throw SchemaViolation(context + "/scores", "scores must be numbers");
            }
            group.scores.push_back(value.get<double>());
        }
        const auto read_optional = [&](const char* key, std::vector<double>& out) {
            if (!node.contains(key)) return;
            if (!node[key].is_array() || node[key].size() != group.scores.size()) {
                throw SchemaViolation(context + "/" + key,
                                      "must be an array matching scores");
            }
            for (const auto& value : node[key]) {
                out.push_back(value.get<double>());
            }
        };
        read_optional("length_penalties", group.length_penalties);
        read_optional("format_bonuses", group.format_bonuses);
        groups.push_back(std::move(group));
    }
    return groups;
}

std::string shaped_rewards_to_json(const std::string& group_id,
                                   const std::vector<ShapedReward>& rewards) {
    njson doc;
    doc["group_id"] = group_id;
    njson array = njson::array();
    for (const auto& reward : rewards) {
        njson node;
        node["raw"] = reward.raw;
        node["scaled"] = reward.scaled;
        node["mean"] = reward.mean;
        node["equal_to"] = reward.equal_to;
        array.push_back(std::move(node));
    }
    doc["rewards"] = std::move(array);
    return doc.dump();
}

}  // namespace rubriceval

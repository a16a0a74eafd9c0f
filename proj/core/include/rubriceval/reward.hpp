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

#ifndef RUBRICEVAL_REWARD_HPP_
#define RUBRICEVAL_REWARD_HPP_

#include <array>
#include <string>
#include <vector>

namespace rubriceval {

// Knobs of reward shaping for grouped rollouts.
struct RewardConfig {
    // Two scores within L of each other count as equal (preference tie).
    double activation_threshold = 0.05;
    // Above-mean amplification slope; >= 1 keeps ranking intact.
    double scale_factor = 2.0;
    // Fusion weights for (rubric score, length penalty, format bonus);
    // normalized to sum 1 at use time.
    std::array<double, 3> fusion_weights = {0.5, 0.3, 0.2};
};

// Throws InvalidConfig unless activation_threshold > 0, scale_factor >= 1,
// all fusion weights >= 0 and their sum > 0.
void validate_config(const RewardConfig& config);

// Preference-equality gate: |a - b| < activation_threshold (strict).
bool activation_equal(double score_a, double score_b, const RewardConfig& config);

// Arithmetic mean of a rollout group. Throws InvalidConfig on empty groups.
double group_mean(const std::vector<double>& scores);

// Piecewise amplification around the group mean: scores below the mean pass
// through, scores above it are scaled by scale_factor. Continuous at the
// mean and strictly increasing for scale_factor >= 1.
double scale_reward(double rollout_score, double mean, const RewardConfig& config);

// Weighted fusion of (rubric score, length penalty, format bonus); weights
// are normalized to sum 1 so fused values stay in the convex hull of the
// signals.
double fuse_rewards(double rubric_score, double length_penalty,
                    double format_bonus, const RewardConfig& config);

struct ShapedReward {
    double raw = 0.0;
    double scaled = 0.0;
    double mean = 0.0;                 // group mean the scaling used
    std::vector<std::size_t> equal_to;  // group indices within the tie gate
};

// One rollout group shaped in one pass: shared mean, per-rollout scaling,
// and the activation-equality adjacency.
std::vector<ShapedReward> shape_group(const std::vector<double>& scores,
                                      const RewardConfig& config);

// Group IO. JSONL per line: {"group_id", "scores": [...]} with optional
// "length_penalties"/"format_bonuses" arrays (same length) for fusion.
struct RolloutGroup {
    std::string group_id;
    std::vector<double> scores;
    std::vector<double> length_penalties;  // empty or |scores|
    std::vector<double> format_bonuses;    // empty or |scores|
};
std::vector<RolloutGroup> load_rollout_groups(const std::string& path);
std::string shaped_rewards_to_json(const std::string& group_id,
                                   const std::vector<ShapedReward>& rewards);

}  // namespace rubriceval

#endif  // RUBRICEVAL_REWARD_HPP_

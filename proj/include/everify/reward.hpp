#pragma once

// Shaped verifier reward and the rollout-group advantage pipeline.
//
// A rating v in [0,10] is mapped to p = 0.1 + 0.08 v and scored with the
// binary cross-entropy log-likelihood of the label. Ratings outside the scale
// (or missing) earn a flat -4.5, which is strictly worse than the worst valid
// reward ln(0.1), so a confidently wrong rating still beats a format error.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "everify/core.hpp"

namespace everify::reward {

inline constexpr double kInvalidRatingPenalty = -4.5;
inline constexpr double kDefaultAdvantageEpsilon = 1e-6;
inline constexpr std::size_t kDefaultRolloutsPerPrompt = 16;

struct RewardValue {
    double value = 0.0;
};

/// Maps a rating in [0,10] onto [0.1, 0.9]. Throws std::domain_error when v
/// lies outside the scale; invalid ratings belong on the penalty path.
double clamp_rating(double v);

bool rating_in_range(double v);

RewardValue response_reward(double v, Label y);

/// Sum of the per-response rewards. A judgment whose parse failed contributes
/// the penalty for both responses.
RewardValue pair_reward(const VerifierJudgment& judgment, PairLabels labels);

/// Group-relative advantages a_i = (r_i - mean) / (pop_std + epsilon).
/// Throws std::invalid_argument for groups with fewer than two rewards.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double epsilon = kDefaultAdvantageEpsilon);

double mean(std::span<const double> xs);
double population_stddev(std::span<const double> xs);

struct RolloutGroup {
    PairInstance instance;
    std::vector<std::string> completions;
    std::vector<double> rewards;
    std::vector<double> advantages;  // empty until computed
};

/// Parses every completion, fills rewards and leaves advantages empty.
RolloutGroup make_rollout_group(PairInstance instance, std::vector<std::string> completions);

struct FilterResult {
    std::vector<RolloutGroup> kept;
    std::size_t dropped_count = 0;
};

/// Drops groups whose reward population std is <= tol (or with fewer than
/// two rollouts) and fills in advantages for the rest; preserves order.
FilterResult filter_zero_variance(std::vector<RolloutGroup> groups, double tol = 1e-9,
                                  double epsilon = kDefaultAdvantageEpsilon);

}  // namespace everify::reward

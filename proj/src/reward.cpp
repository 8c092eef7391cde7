#include "everify/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "everify/verdict.hpp"

namespace everify::reward {

bool rating_in_range(double v) { return v >= 0.0 && v <= 10.0; }

double clamp_rating(double v) {
    if (!rating_in_range(v)) throw std::domain_error("rating outside [0,10]");
    return 0.1 + 0.08 * v;
}

RewardValue response_reward(double v, Label y) {
    if (!rating_in_range(v)) return {kInvalidRatingPenalty};
    const double p = clamp_rating(v);
    return {y != 0 ? std::log(p) : std::log(1.0 - p)};
}

RewardValue pair_reward(const VerifierJudgment& judgment, PairLabels labels) {
    if (!judgment.ok()) return {2.0 * kInvalidRatingPenalty};
    return {response_reward(judgment.rating_a, labels.a).value +
            response_reward(judgment.rating_b, labels.b).value};
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_stddev(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon) {
    if (rewards.size() < 2) throw std::invalid_argument("group_advantages needs at least two rewards");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
    const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
    if (*lo == *hi) return std::vector<double>(rewards.size(), 0.0);
    const double m = mean(rewards);
    const double denom = population_stddev(rewards) + epsilon;
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) {
        const double centered = r - m;
        out.push_back(centered == 0.0 ? 0.0 : centered / denom);
    }
    return out;
}

RolloutGroup make_rollout_group(PairInstance instance, std::vector<std::string> completions) {
    RolloutGroup g{std::move(instance), std::move(completions), {}, {}};
    g.rewards.reserve(g.completions.size());
    for (const auto& c : g.completions) {
        g.rewards.push_back(pair_reward(verdict::judge_completion(c), g.instance.labels).value);
    }
    return g;
}

FilterResult filter_zero_variance(std::vector<RolloutGroup> groups, double tol, double epsilon) {
    FilterResult out;
    for (auto& g : groups) {
        if (g.rewards.size() < 2 || population_stddev(g.rewards) <= tol) {
            ++out.dropped_count;
        } else {
            g.advantages = group_advantages(g.rewards, epsilon);
            out.kept.push_back(std::move(g));
        }
    }
    return out;
}

}  // namespace everify::reward

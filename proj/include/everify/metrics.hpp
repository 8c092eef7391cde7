#pragma once

// Analyses over logged judgments and strategy outcomes: accuracy by
// ground-truth configuration, calibration, rating separation by pass@k
// bin, distinct-answer counts and token efficiency.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "everify/core.hpp"
#include "everify/strategies.hpp"
#include "everify/verdict.hpp"

namespace everify::metrics {

struct LabeledJudgment {
    VerifierJudgment judgment;
    PairLabels labels;
};

enum class JudgmentRubric {
    /// Correct iff (v >= tau) matches the label for both responses.
    threshold,
    /// Threshold for same-label pairs; for mixed pairs the correct response
    /// must be rated strictly higher.
    argmax_mixed,
};

bool judgment_correct(const LabeledJudgment& r, double tau, JudgmentRubric rubric = JudgmentRubric::threshold);

struct GtAccuracy {
    std::size_t count = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
};

/// Configurations with no records are absent from the map. Unparsed
/// judgments count as incorrect.
std::map<GtConfig, GtAccuracy> accuracy_by_gt_config(std::span<const LabeledJudgment> records, double tau,
                                                     JudgmentRubric rubric = JudgmentRubric::threshold);

struct RatedLabel {
    double rating = 0.0;
    Label label = 0;
};

/// Two (rating, label) records per parsed judgment; unparsed ones are skipped.
std::vector<RatedLabel> rated_labels(std::span<const LabeledJudgment> records);

struct CalibrationBucket {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_rating = 0.0;         // NaN for empty buckets
    double empirical_accuracy = 0.0;  // NaN for empty buckets
    double ideal_accuracy = 0.0;      // bucket midpoint / 10
};

struct CalibrationReport {
    std::vector<CalibrationBucket> buckets;
    std::size_t total = 0;
    /// Count-weighted mean of |empirical - ideal| over non-empty buckets.
    double ece = 0.0;
};

/// Equal-width buckets over [0,10]; the last bucket includes 10. Throws
/// std::invalid_argument for n_buckets < 2 or ratings outside [0,10].
CalibrationReport calibration(std::span<const RatedLabel> records, int n_buckets = 10);

/// Unbiased pass@k from n samples with c correct: 1 - C(n-c,k)/C(n,k).
/// Throws std::invalid_argument unless 1 <= k <= n and c <= n.
double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k);
double success_rate(std::span<const Label> samples, std::int64_t k);

/// Bin label for a question with `correct` successes: "0", "1-5", "6-10",
/// or ">10".
std::string pass_bin(std::int64_t correct);

struct BinnedRating {
    double rating = 0.0;
    Label label = 0;
    std::string bin;
};

struct SeparationBin {
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;
    std::optional<double> mean_correct;
    std::optional<double> mean_incorrect;
    std::optional<double> var_correct;    // population variance
    std::optional<double> var_incorrect;
    std::optional<double> gap;            // mean_correct - mean_incorrect
};

struct SeparationReport {
    std::map<std::string, SeparationBin> bins;
};

SeparationReport separation(std::span<const BinnedRating> records);

/// Equivalence classes of extracted answers; responses without an answer
/// share one extra class.
std::size_t distinct_answers(std::span<const CandidateResponse> responses,
                             const verdict::EquivalenceOracle& oracle = {});

enum class TokenBasis {
    /// Completion tokens of every call, verifier included.
    total,
    /// Completion tokens of candidate-producing calls only.
    generation,
};

struct TokenEfficiency {
    std::optional<double> accuracy_a;
    std::optional<double> accuracy_b;
    std::int64_t tokens_a = 0;
    std::int64_t tokens_b = 0;
    double token_ratio = 0.0;
    std::size_t questions = 0;
};

/// Compares two outcome lists over the same question set. Throws
/// std::invalid_argument when the id sets differ or b used no tokens.
TokenEfficiency token_efficiency(std::span<const strategies::StrategyOutcome> a,
                                 std::span<const strategies::StrategyOutcome> b,
                                 TokenBasis basis = TokenBasis::total);

}  // namespace everify::metrics

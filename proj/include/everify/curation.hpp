#pragma once

// Dataset preparation: question filters, ground-truth validation, response
// labeling, pair construction, length and difficulty filters, and the
// question-disjoint holdout split.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "everify/core.hpp"
#include "everify/expression.hpp"
#include "everify/tokenizer.hpp"

namespace everify {
class ModelClient;
}

namespace everify::curation {

enum class FilterReason {
    ok,
    multiple_choice,
    multi_answer,
    open_ended_proof,
    non_numeric_ground_truth,
    ambiguous_flagged,
    too_long,
    too_hard,
};

std::string_view to_string(FilterReason r);
FilterReason filter_reason_from_string(std::string_view s);

struct FilterVerdict {
    bool accepted = true;
    FilterReason reason = FilterReason::ok;

    static FilterVerdict accept() { return {}; }
    static FilterVerdict reject(FilterReason r) { return {false, r}; }
    bool operator==(const FilterVerdict&) const = default;
};

struct CurationConfig {
    std::int64_t max_input_tokens = 6144;
    double difficulty_cutoff = 0.8;
    std::int64_t pairs_per_question = 6;
    std::int64_t holdout_count = 294;
    std::uint64_t seed = 0;
    /// Tokens contributed by the verifier prompt template around the pair.
    std::int64_t template_overhead_tokens = 0;

    void validate() const;
};

/// Returns the first failing rule: multiple choice, multiple sub-answers,
/// proof/open-ended wording, then a ground truth that is not a single number.
FilterVerdict filter_question(const Question& q);

/// Value of a ground-truth expression. Throws verdict::ExpressionError.
double evaluate_ground_truth(std::string_view expr);

/// Strips think content, extracts the boxed answer, counts tokens of the
/// stripped text and labels each response against the ground truth.
std::vector<CandidateResponse> label_responses(const Question& q, std::vector<CandidateResponse> responses,
                                               const Tokenizer& tokenizer = default_tokenizer());

/// Fraction of incorrect responses. Throws std::invalid_argument when the
/// list is empty or a response is unlabeled.
double difficulty(const std::vector<CandidateResponse>& labeled);

/// Pair slots in quota order. The quota per question is two
/// correct/incorrect, one incorrect/correct, one correct/correct, one
/// incorrect/incorrect with different answers and one incorrect/incorrect
/// with the same answer.
enum class PairKind { correct_incorrect, incorrect_correct, both_correct, incorrect_distinct, incorrect_identical };

std::string_view to_string(PairKind k);

/// Samples up to cfg.pairs_per_question pairs following the quota. Empty or
/// exhausted categories are backfilled round-robin from the others. The
/// same unordered response pair is never used twice. Deterministic in
/// (cfg.seed, q.id).
std::vector<PairInstance> build_pairs(const Question& q, const std::vector<CandidateResponse>& labeled,
                                      const CurationConfig& cfg);

/// Input size of a pair as seen by the verifier.
std::int64_t pair_input_tokens(const PairInstance& pair, const CurationConfig& cfg,
                               const Tokenizer& tokenizer = default_tokenizer());

/// Rejects with too_long when the pair input strictly exceeds the limit.
FilterVerdict length_filter(const PairInstance& pair, const CurationConfig& cfg,
                            const Tokenizer& tokenizer = default_tokenizer());

struct Split {
    std::vector<PairInstance> train;
    std::vector<PairInstance> validation;
};

/// Moves exactly cfg.holdout_count pairs into validation, taking whole
/// questions in seeded order and skipping any that would overshoot. Only if
/// whole questions cannot hit the quota exactly is one question split.
/// Throws std::invalid_argument when there are not more pairs than the quota.
Split split_holdout(std::vector<PairInstance> pairs, const CurationConfig& cfg);

/// Asks a judge model whether the question is ambiguous or under-specified.
/// Replies starting with "yes" (case-insensitive, after think stripping)
/// reject with ambiguous_flagged.
FilterVerdict ambiguity_filter(const Question& q, ModelClient& judge, std::uint64_t seed);

struct Rejection {
    std::string id;
    FilterReason reason = FilterReason::ok;
};

struct CuratedQuestion {
    Question question;
    std::vector<CandidateResponse> responses;
};

struct PipelineResult {
    Split split;
    std::vector<Rejection> rejections;
    /// Labeled responses of every question that passed the question filters.
    std::vector<CandidateResponse> labeled;
};

/// Full cascade over a corpus. Questions are processed in id order; the
/// judge is optional. Throws ValidationError on duplicate or invalid ids.
PipelineResult run_pipeline(std::vector<CuratedQuestion> corpus, const CurationConfig& cfg,
                            const Tokenizer& tokenizer = default_tokenizer(), ModelClient* judge = nullptr);

}  // namespace everify::curation

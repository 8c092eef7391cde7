#pragma once

// Domain types shared by every module: questions, candidate responses,
// labeled pairs, parsed verifier judgments and training-stage presets.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace everify {

/// Binary correctness label (y in {0,1}).
using Label = int;

enum class Source { numina, taco, leetcode, synthetic };

std::string_view to_string(Source s);
Source source_from_string(std::string_view s);

struct Question {
    std::string id;
    std::string text;
    std::string ground_truth;
    Source source = Source::synthetic;
    std::map<std::string, std::string> metadata;

    bool operator==(const Question&) const = default;
};

struct CandidateResponse {
    std::string question_id;
    std::string raw_text;
    /// raw_text with every <think>...</think> span removed.
    std::string stripped_text;
    std::optional<std::string> extracted_answer;
    std::optional<Label> label;
    std::int64_t token_count = 0;

    bool operator==(const CandidateResponse&) const = default;
};

struct PairLabels {
    Label a = 0;
    Label b = 0;

    bool operator==(const PairLabels&) const = default;
};

struct PairInstance {
    Question question;
    CandidateResponse response_a;
    CandidateResponse response_b;
    PairLabels labels;

    bool operator==(const PairInstance&) const = default;
};

enum class ParseStatus { ok, missing_ratings, out_of_range, malformed };

std::string_view to_string(ParseStatus s);
ParseStatus parse_status_from_string(std::string_view s);

/// Parsed verifier completion. Ratings are NaN when they could not be read;
/// out-of-range ratings keep their raw values.
struct VerifierJudgment {
    std::string reasoning;
    double rating_a = 0.0;
    double rating_b = 0.0;
    ParseStatus parse_status = ParseStatus::malformed;

    bool ok() const { return parse_status == ParseStatus::ok; }
    /// Exchange the roles of A and B.
    VerifierJudgment swapped() const;
};

bool operator==(const VerifierJudgment& lhs, const VerifierJudgment& rhs);

enum class GtConfig { both_correct, both_incorrect, a_only, b_only };

std::string_view to_string(GtConfig c);
GtConfig gt_config_from_string(std::string_view s);

GtConfig gt_config(PairLabels labels);
inline GtConfig gt_config(Label a, Label b) { return gt_config(PairLabels{a, b}); }

struct StageConfig {
    std::int64_t max_seq_len = 0;
    std::int64_t global_batch = 0;
    std::int64_t rollouts_per_prompt = 0;
    double learning_rate = 0.0;
    double kl_coef = 0.0;
    double entropy_coef = 0.0;
    double difficulty_cutoff = 1.0;
    std::int64_t steps = 0;

    /// Throws std::invalid_argument when a count is non-positive or the
    /// cutoff lies outside [0,1].
    void validate() const;

    bool operator==(const StageConfig&) const = default;
};

/// Math-only stage: MSL 8192, batch 256, 16 rollouts, 240 steps.
StageConfig stage1_config();
/// Math+code stage: MSL 16384, batch 512, entropy 1e-3, difficulty <= 0.8.
StageConfig stage2_config();

/// Raised when input records violate a type invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate(const Question& q);
void validate(const CandidateResponse& r);
void validate(const PairInstance& p);

/// Stable 64-bit FNV-1a hash; used wherever seeds are derived from strings.
std::uint64_t stable_hash(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// SplitMix64 mixing of a seed with a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace everify

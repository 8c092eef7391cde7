#include "everify/core.hpp"

#include <cmath>

namespace everify {

namespace {

bool same_rating(double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
}

}  // namespace

std::string_view to_string(Source s) {
    switch (s) {
        case Source::numina: return "numina";
        case Source::taco: return "taco";
        case Source::leetcode: return "leetcode";
        case Source::synthetic: return "synthetic";
    }
    return "synthetic";
}

Source source_from_string(std::string_view s) {
    if (s == "numina") return Source::numina;
    if (s == "taco") return Source::taco;
    if (s == "leetcode") return Source::leetcode;
    if (s == "synthetic") return Source::synthetic;
    throw ValidationError("unknown question source: " + std::string(s));
}

std::string_view to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::missing_ratings: return "missing_ratings";
        case ParseStatus::out_of_range: return "out_of_range";
        case ParseStatus::malformed: return "malformed";
    }
    return "malformed";
}

ParseStatus parse_status_from_string(std::string_view s) {
    if (s == "ok") return ParseStatus::ok;
    if (s == "missing_ratings") return ParseStatus::missing_ratings;
    if (s == "out_of_range") return ParseStatus::out_of_range;
    if (s == "malformed") return ParseStatus::malformed;
    throw ValidationError("unknown parse status: " + std::string(s));
}

VerifierJudgment VerifierJudgment::swapped() const {
    VerifierJudgment out = *this;
    std::swap(out.rating_a, out.rating_b);
    return out;
}

bool operator==(const VerifierJudgment& lhs, const VerifierJudgment& rhs) {
    return lhs.reasoning == rhs.reasoning && same_rating(lhs.rating_a, rhs.rating_a) &&
           same_rating(lhs.rating_b, rhs.rating_b) && lhs.parse_status == rhs.parse_status;
}

std::string_view to_string(GtConfig c) {
    switch (c) {
        case GtConfig::both_correct: return "both_correct";
        case GtConfig::both_incorrect: return "both_incorrect";
        case GtConfig::a_only: return "a_only";
        case GtConfig::b_only: return "b_only";
    }
    return "both_incorrect";
}

GtConfig gt_config_from_string(std::string_view s) {
    if (s == "both_correct") return GtConfig::both_correct;
    if (s == "both_incorrect") return GtConfig::both_incorrect;
    if (s == "a_only") return GtConfig::a_only;
    if (s == "b_only") return GtConfig::b_only;
    throw ValidationError("unknown GT configuration: " + std::string(s));
}

GtConfig gt_config(PairLabels labels) {
    const bool a = labels.a != 0;
    const bool b = labels.b != 0;
    if (a && b) return GtConfig::both_correct;
    if (!a && !b) return GtConfig::both_incorrect;
    return a ? GtConfig::a_only : GtConfig::b_only;
}

void StageConfig::validate() const {
    if (max_seq_len <= 0 || global_batch <= 0 || rollouts_per_prompt <= 0 || steps <= 0) {
        throw std::invalid_argument("stage config counts must be positive");
    }
    if (!(difficulty_cutoff >= 0.0 && difficulty_cutoff <= 1.0)) {
        throw std::invalid_argument("difficulty_cutoff must lie in [0,1]");
    }
}

StageConfig stage1_config() {
    return StageConfig{8192, 256, 16, 1e-6, 0.001, 0.0, 1.0, 240};
}

StageConfig stage2_config() {
    return StageConfig{16384, 512, 16, 1e-6, 0.001, 0.001, 0.8, 120};
}

void validate(const Question& q) {
    if (q.id.empty()) throw ValidationError("question id is empty");
    if (q.ground_truth.empty()) throw ValidationError("question " + q.id + " has empty ground_truth");
}

void validate(const CandidateResponse& r) {
    if (r.token_count < 0) throw ValidationError("negative token_count for " + r.question_id);
    if (r.extracted_answer && r.extracted_answer->empty()) {
        throw ValidationError("extracted_answer present but empty for " + r.question_id);
    }
    if (r.label && *r.label != 0 && *r.label != 1) {
        throw ValidationError("label must be 0 or 1 for " + r.question_id);
    }
    if (r.stripped_text.find("<think>") != std::string::npos ||
        r.stripped_text.find("</think>") != std::string::npos) {
        throw ValidationError("stripped_text still contains think markers for " + r.question_id);
    }
}

void validate(const PairInstance& p) {
    validate(p.question);
    validate(p.response_a);
    validate(p.response_b);
    if (p.response_a.question_id != p.question.id || p.response_b.question_id != p.question.id) {
        throw ValidationError("pair responses do not reference question " + p.question.id);
    }
    auto binary = [](Label y) { return y == 0 || y == 1; };
    if (!binary(p.labels.a) || !binary(p.labels.b)) {
        throw ValidationError("pair labels must be binary for " + p.question.id);
    }
}

std::uint64_t stable_hash(std::string_view s, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace everify

#include "everify/curation.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "everify/client.hpp"
#include "everify/verdict.hpp"

namespace everify::curation {

namespace {

bool is_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool contains_word(std::string_view haystack, std::string_view phrase) {
    std::size_t pos = 0;
    while ((pos = haystack.find(phrase, pos)) != std::string_view::npos) {
        const bool left = pos == 0 || !is_alnum(haystack[pos - 1]);
        const std::size_t end = pos + phrase.size();
        const bool right = end >= haystack.size() || !is_alnum(haystack[end]);
        if (left && right) return true;
        ++pos;
    }
    return false;
}

// "(A)" anywhere after a non-alphanumeric, or "A)" / "A." / "A:" at a line or
// word start followed by whitespace.
bool has_option_marker(std::string_view text, char letter) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const bool boundary = i == 0 || !is_alnum(text[i - 1]);
        if (!boundary) continue;
        if (text[i] == '(' && i + 2 < text.size() && text[i + 1] == letter && text[i + 2] == ')') return true;
        if (text[i] == letter && i + 2 < text.size() &&
            (text[i + 1] == ')' || text[i + 1] == '.' || text[i + 1] == ':') && is_space(text[i + 2]) &&
            (i == 0 || is_space(text[i - 1]))) {
            return true;
        }
    }
    return false;
}

bool looks_multiple_choice(const Question& q) {
    return has_option_marker(q.text, 'A') && has_option_marker(q.text, 'B');
}

bool has_enumerated_parts(std::string_view text, std::string_view first, std::string_view second) {
    auto find_marker = [&](std::string_view m) {
        std::size_t pos = 0;
        while ((pos = text.find(m, pos)) != std::string_view::npos) {
            if (pos == 0 || !is_alnum(text[pos - 1])) return true;
            ++pos;
        }
        return false;
    };
    return find_marker(first) && find_marker(second);
}

bool looks_multi_answer(const Question& q) {
    const std::string gt = verdict::normalize_answer(q.ground_truth);
    if (gt.find_first_of(",;") != std::string::npos) return true;
    if (gt.find("\\pm") != std::string::npos || gt.find("\\mp") != std::string::npos ||
        gt.find("\xC2\xB1") != std::string::npos) {
        return true;
    }
    const std::string raw = lower(q.ground_truth);
    if (contains_word(raw, "and") || contains_word(raw, "or")) return true;
    return has_enumerated_parts(q.text, "(1)", "(2)") || has_enumerated_parts(q.text, "(I)", "(II)") ||
           has_enumerated_parts(q.text, "(a)", "(b)");
}

bool looks_open_ended(const Question& q) {
    const std::string text = lower(q.text);
    for (std::string_view kw : {"prove", "proof", "show that", "explain why", "demonstrate that", "justify"}) {
        if (contains_word(text, kw)) return true;
    }
    return false;
}

std::string trim_copy(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

template <typename T>
void shuffle_with(std::vector<T>& v, std::mt19937_64& rng) {
    // Raw-engine Fisher-Yates: the order must not depend on the standard
    // library's distribution implementation.
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

std::string_view to_string(FilterReason r) {
    switch (r) {
        case FilterReason::ok: return "ok";
        case FilterReason::multiple_choice: return "multiple_choice";
        case FilterReason::multi_answer: return "multi_answer";
        case FilterReason::open_ended_proof: return "open_ended_proof";
        case FilterReason::non_numeric_ground_truth: return "non_numeric_ground_truth";
        case FilterReason::ambiguous_flagged: return "ambiguous_flagged";
        case FilterReason::too_long: return "too_long";
        case FilterReason::too_hard: return "too_hard";
    }
    return "ok";
}

FilterReason filter_reason_from_string(std::string_view s) {
    for (auto r : {FilterReason::ok, FilterReason::multiple_choice, FilterReason::multi_answer,
                   FilterReason::open_ended_proof, FilterReason::non_numeric_ground_truth,
                   FilterReason::ambiguous_flagged, FilterReason::too_long, FilterReason::too_hard}) {
        if (to_string(r) == s) return r;
    }
    throw ValidationError("unknown filter reason: " + std::string(s));
}

std::string_view to_string(PairKind k) {
    switch (k) {
        case PairKind::correct_incorrect: return "correct_incorrect";
        case PairKind::incorrect_correct: return "incorrect_correct";
        case PairKind::both_correct: return "both_correct";
        case PairKind::incorrect_distinct: return "incorrect_distinct";
        case PairKind::incorrect_identical: return "incorrect_identical";
    }
    return "correct_incorrect";
}

void CurationConfig::validate() const {
    if (max_input_tokens <= 0 || pairs_per_question <= 0 || holdout_count <= 0) {
        throw std::invalid_argument("curation counts must be positive");
    }
    if (!(difficulty_cutoff >= 0.0 && difficulty_cutoff <= 1.0)) {
        throw std::invalid_argument("difficulty_cutoff must lie in [0,1]");
    }
    if (template_overhead_tokens < 0) throw std::invalid_argument("template_overhead_tokens must be >= 0");
}

FilterVerdict filter_question(const Question& q) {
    if (looks_multiple_choice(q)) return FilterVerdict::reject(FilterReason::multiple_choice);
    if (looks_multi_answer(q)) return FilterVerdict::reject(FilterReason::multi_answer);
    if (looks_open_ended(q)) return FilterVerdict::reject(FilterReason::open_ended_proof);
    try {
        evaluate_ground_truth(q.ground_truth);
    } catch (const verdict::ExpressionError&) {
        return FilterVerdict::reject(FilterReason::non_numeric_ground_truth);
    }
    return FilterVerdict::accept();
}

double evaluate_ground_truth(std::string_view expr) { return verdict::evaluate_expression(expr); }

std::vector<CandidateResponse> label_responses(const Question& q, std::vector<CandidateResponse> responses,
                                               const Tokenizer& tokenizer) {
    for (auto& r : responses) {
        if (r.question_id.empty()) r.question_id = q.id;
        if (r.question_id != q.id) {
            throw ValidationError("response for " + r.question_id + " passed with question " + q.id);
        }
        r.stripped_text = trim_copy(verdict::strip_think(r.raw_text).final_answer_region);
        r.extracted_answer = verdict::extract_boxed(r.stripped_text);
        if (r.extracted_answer) {
            *r.extracted_answer = trim_copy(*r.extracted_answer);
            if (r.extracted_answer->empty()) r.extracted_answer.reset();
        }
        r.label = r.extracted_answer && verdict::answers_equivalent(*r.extracted_answer, q.ground_truth) ? 1 : 0;
        r.token_count = tokenizer.count(r.stripped_text);
    }
    return responses;
}

double difficulty(const std::vector<CandidateResponse>& labeled) {
    if (labeled.empty()) throw std::invalid_argument("difficulty of an empty response set");
    std::size_t correct = 0;
    for (const auto& r : labeled) {
        if (!r.label) throw std::invalid_argument("difficulty needs labeled responses");
        correct += *r.label != 0 ? 1 : 0;
    }
    return 1.0 - static_cast<double>(correct) / static_cast<double>(labeled.size());
}

std::vector<PairInstance> build_pairs(const Question& q, const std::vector<CandidateResponse>& labeled,
                                      const CurationConfig& cfg) {
    if (labeled.size() < 2) return {};
    std::mt19937_64 rng(mix_seed(cfg.seed, stable_hash(q.id)));

    std::vector<std::size_t> correct;
    std::vector<std::size_t> incorrect;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        (labeled[i].label.value_or(0) != 0 ? correct : incorrect).push_back(i);
    }
    shuffle_with(correct, rng);
    shuffle_with(incorrect, rng);

    using Candidate = std::pair<std::size_t, std::size_t>;
    constexpr std::size_t kKinds = 5;
    std::array<std::vector<Candidate>, kKinds> pools;
    for (auto c : correct)
        for (auto i : incorrect) pools[0].emplace_back(c, i);
    for (auto i : incorrect)
        for (auto c : correct) pools[1].emplace_back(i, c);
    for (std::size_t x = 0; x < correct.size(); ++x)
        for (std::size_t y = x + 1; y < correct.size(); ++y) pools[2].emplace_back(correct[x], correct[y]);
    for (std::size_t x = 0; x < incorrect.size(); ++x) {
        for (std::size_t y = x + 1; y < incorrect.size(); ++y) {
            const auto& ra = labeled[incorrect[x]].extracted_answer;
            const auto& rb = labeled[incorrect[y]].extracted_answer;
            const bool same = ra && rb && verdict::answers_equivalent(*ra, *rb);
            pools[same ? 4 : 3].emplace_back(incorrect[x], incorrect[y]);
        }
    }
    for (auto& pool : pools) shuffle_with(pool, rng);

    std::array<std::size_t, kKinds> cursor{};
    std::set<Candidate> used;
    auto take = [&](std::size_t kind) -> std::optional<Candidate> {
        auto& pool = pools[kind];
        while (cursor[kind] < pool.size()) {
            Candidate c = pool[cursor[kind]++];
            Candidate key{std::min(c.first, c.second), std::max(c.first, c.second)};
            if (used.insert(key).second) return c;
        }
        return std::nullopt;
    };

    static constexpr std::array<std::size_t, 6> kQuota = {0, 0, 1, 2, 3, 4};
    const auto target = static_cast<std::size_t>(cfg.pairs_per_question);
    std::vector<Candidate> chosen;
    std::size_t unfilled = 0;
    for (std::size_t slot = 0; slot < target; ++slot) {
        if (auto c = take(kQuota[slot % kQuota.size()])) chosen.push_back(*c);
        else ++unfilled;
    }
    std::size_t rr = 0;
    while (unfilled > 0) {
        bool any = false;
        for (std::size_t step = 0; step < kKinds && unfilled > 0; ++step) {
            if (auto c = take((rr + step) % kKinds)) {
                chosen.push_back(*c);
                --unfilled;
                any = true;
                rr = (rr + step + 1) % kKinds;
                break;
            }
        }
        if (!any) break;
    }

    std::vector<PairInstance> out;
    out.reserve(chosen.size());
    for (auto [a, b] : chosen) {
        PairInstance p{q, labeled[a], labeled[b], {labeled[a].label.value_or(0), labeled[b].label.value_or(0)}};
        out.push_back(std::move(p));
    }
    return out;
}

std::int64_t pair_input_tokens(const PairInstance& pair, const CurationConfig& cfg, const Tokenizer& tokenizer) {
    return tokenizer.count(pair.question.text) + tokenizer.count(pair.response_a.stripped_text) +
           tokenizer.count(pair.response_b.stripped_text) + cfg.template_overhead_tokens;
}

FilterVerdict length_filter(const PairInstance& pair, const CurationConfig& cfg, const Tokenizer& tokenizer) {
    if (pair_input_tokens(pair, cfg, tokenizer) > cfg.max_input_tokens) {
        return FilterVerdict::reject(FilterReason::too_long);
    }
    return FilterVerdict::accept();
}

Split split_holdout(std::vector<PairInstance> pairs, const CurationConfig& cfg) {
    const auto quota = static_cast<std::size_t>(cfg.holdout_count);
    if (pairs.size() <= quota) {
        throw std::invalid_argument("split_holdout needs more than " + std::to_string(quota) + " pairs, got " +
                                    std::to_string(pairs.size()));
    }
    std::map<std::string, std::vector<std::size_t>> by_question;
    for (std::size_t i = 0; i < pairs.size(); ++i) by_question[pairs[i].question.id].push_back(i);
    std::vector<std::string> order;
    for (const auto& [id, _] : by_question) order.push_back(id);
    std::mt19937_64 rng(mix_seed(cfg.seed, stable_hash("holdout")));
    shuffle_with(order, rng);

    // reach[i][s]: some subset of whole questions order[i..] holds exactly s pairs.
    const std::size_t n = order.size();
    std::vector<std::vector<bool>> reach(n + 1, std::vector<bool>(quota + 1, false));
    reach[n][0] = true;
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t size = by_question[order[i]].size();
        for (std::size_t s = 0; s <= quota; ++s) reach[i][s] = reach[i + 1][s] || (size <= s && reach[i + 1][s - size]);
    }

    std::vector<bool> to_validation(pairs.size(), false);
    std::size_t remaining = quota;
    if (reach[0][quota]) {
        for (std::size_t i = 0; i < n && remaining > 0; ++i) {
            const auto& idx = by_question[order[i]];
            if (idx.size() <= remaining && reach[i + 1][remaining - idx.size()]) {
                for (auto k : idx) to_validation[k] = true;
                remaining -= idx.size();
            }
        }
    } else {
        // No exact disjoint fill exists; whole questions first, then part of one.
        for (std::size_t i = 0; i < n && remaining > 0; ++i) {
            const auto& idx = by_question[order[i]];
            if (idx.size() <= remaining) {
                for (auto k : idx) to_validation[k] = true;
                remaining -= idx.size();
            }
        }
        for (std::size_t i = 0; i < n && remaining > 0; ++i) {
            const auto& idx = by_question[order[i]];
            if (to_validation[idx.front()]) continue;
            for (std::size_t k = 0; k < remaining; ++k) to_validation[idx[k]] = true;
            remaining = 0;
        }
    }

    Split split;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        (to_validation[i] ? split.validation : split.train).push_back(std::move(pairs[i]));
    }
    return split;
}

FilterVerdict ambiguity_filter(const Question& q, ModelClient& judge, std::uint64_t seed) {
    const std::string prompt =
        "Decide whether the following math question is ambiguous or under-specified, i.e. whether it "
        "admits more than one reasonable interpretation or lacks information needed for a unique "
        "numeric answer. Reply with YES or NO only.\n\nQuestion:\n" +
        q.text;
    GenerationParams params;
    params.temperature = 0.0;
    params.max_tokens = 2048;
    params.seed = mix_seed(seed, stable_hash(q.id));
    const Generation g = judge.generate(prompt, params);
    std::string reply = lower(trim_copy(verdict::strip_think(g.text).final_answer_region));
    while (!reply.empty() && (reply.front() == '*' || reply.front() == '"')) reply.erase(reply.begin());
    if (reply.rfind("yes", 0) == 0) return FilterVerdict::reject(FilterReason::ambiguous_flagged);
    return FilterVerdict::accept();
}

PipelineResult run_pipeline(std::vector<CuratedQuestion> corpus, const CurationConfig& cfg,
                            const Tokenizer& tokenizer, ModelClient* judge) {
    cfg.validate();
    std::set<std::string> seen;
    for (const auto& item : corpus) {
        validate(item.question);
        if (!seen.insert(item.question.id).second) {
            throw ValidationError("duplicate question id: " + item.question.id);
        }
    }
    std::sort(corpus.begin(), corpus.end(),
              [](const CuratedQuestion& a, const CuratedQuestion& b) { return a.question.id < b.question.id; });

    PipelineResult result;
    std::vector<PairInstance> kept;
    for (auto& item : corpus) {
        const Question& q = item.question;
        if (auto v = filter_question(q); !v.accepted) {
            result.rejections.push_back({q.id, v.reason});
            continue;
        }
        if (judge) {
            if (auto v = ambiguity_filter(q, *judge, cfg.seed); !v.accepted) {
                result.rejections.push_back({q.id, v.reason});
                continue;
            }
        }
        auto labeled = label_responses(q, std::move(item.responses), tokenizer);
        result.labeled.insert(result.labeled.end(), labeled.begin(), labeled.end());
        if (labeled.empty()) continue;
        if (difficulty(labeled) > cfg.difficulty_cutoff) {
            result.rejections.push_back({q.id, FilterReason::too_hard});
            continue;
        }
        auto pairs = build_pairs(q, labeled, cfg);
        for (std::size_t n = 0; n < pairs.size(); ++n) {
            if (auto v = length_filter(pairs[n], cfg, tokenizer); !v.accepted) {
                result.rejections.push_back({q.id + "#" + std::to_string(n), v.reason});
            } else {
                kept.push_back(std::move(pairs[n]));
            }
        }
    }
    result.split = split_holdout(std::move(kept), cfg);
    return result;
}

}  // namespace everify::curation

#include "everify/verdict.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace everify::verdict {

namespace {

constexpr std::string_view kOpen = "<think>";
constexpr std::string_view kClose = "</think>";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Reads [-]digits[.digits] at `pos`; advances pos on success.
std::optional<double> read_number(std::string_view s, std::size_t& pos) {
    std::size_t i = pos;
    if (i < s.size() && s[i] == '-') ++i;
    const std::size_t digits_start = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == digits_start) return std::nullopt;
    if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + i, v);
    if (ec != std::errc() || ptr != s.data() + i) return std::nullopt;
    pos = i;
    return v;
}

std::optional<double> parse_whole_number(std::string_view s) {
    s = trim(s);
    std::size_t pos = 0;
    auto v = read_number(s, pos);
    if (!v || pos != s.size()) return std::nullopt;
    return v;
}

struct RatingPair {
    double a = kNaN;
    double b = kNaN;
};

std::optional<RatingPair> boxed_pair(std::string_view region) {
    auto box = extract_boxed(region);
    if (!box) return std::nullopt;
    const auto sep = box->find_first_of(",;");
    if (sep == std::string::npos || box->find_first_of(",;", sep + 1) != std::string::npos) return std::nullopt;
    auto a = parse_whole_number(std::string_view(*box).substr(0, sep));
    auto b = parse_whole_number(std::string_view(*box).substr(sep + 1));
    if (!a || !b) return std::nullopt;
    return RatingPair{*a, *b};
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

void skip_fill(std::string_view s, std::size_t& i) {
    while (i < s.size() && (is_space(s[i]) || s[i] == '*' || s[i] == '_' || s[i] == '#')) ++i;
}

bool skip_word(std::string_view s, std::size_t& i, std::string_view word) {
    if (s.compare(i, word.size(), word) != 0) return false;
    const std::size_t end = i + word.size();
    if (end < s.size() && is_alnum(s[end])) return false;
    i = end;
    return true;
}

// Tries to read "<label> [:=] <number>" right after a keyword.
std::optional<std::pair<char, double>> labeled_value(std::string_view s, std::size_t i) {
    skip_fill(s, i);
    if (skip_word(s, i, "for") || skip_word(s, i, "of")) skip_fill(s, i);
    if (skip_word(s, i, "response") || skip_word(s, i, "candidate")) skip_fill(s, i);
    const bool paren = i < s.size() && s[i] == '(';
    if (paren) ++i;
    if (i >= s.size() || (s[i] != 'a' && s[i] != 'b')) return std::nullopt;
    const char label = s[i++];
    if (paren) {
        if (i >= s.size() || s[i] != ')') return std::nullopt;
        ++i;
    }
    if (i < s.size() && is_alnum(s[i])) return std::nullopt;
    for (int round = 0; round < 3; ++round) {
        skip_fill(s, i);
        while (i < s.size() && (s[i] == ':' || s[i] == '=')) ++i;
        skip_fill(s, i);
        if (!(skip_word(s, i, "rating") || skip_word(s, i, "score") || skip_word(s, i, "is"))) break;
    }
    auto v = read_number(s, i);
    if (!v) return std::nullopt;
    return std::pair{label, *v};
}

std::optional<RatingPair> labeled_pair(std::string_view region) {
    const std::string lower = to_lower_ascii(region);
    const std::string_view s = lower;
    std::optional<double> a;
    std::optional<double> b;
    static constexpr std::array<std::string_view, 3> keywords = {"response", "rating", "score"};
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i > 0 && is_alnum(s[i - 1])) continue;
        for (auto kw : keywords) {
            std::size_t j = i;
            if (!skip_word(s, j, kw)) continue;
            if (auto hit = labeled_value(s, j)) (hit->first == 'a' ? a : b) = hit->second;
        }
    }
    if (!a || !b) return std::nullopt;
    return RatingPair{*a, *b};
}

std::vector<double> bare_numbers(std::string_view s) {
    std::vector<double> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const bool starts = is_digit(s[i]) || (s[i] == '-' && i + 1 < s.size() && is_digit(s[i + 1]));
        const bool boundary = i == 0 || !(is_alnum(s[i - 1]) || s[i - 1] == '.');
        if (!(starts && boundary)) {
            ++i;
            continue;
        }
        auto v = read_number(s, i);
        if (!v) {
            ++i;
            continue;
        }
        out.push_back(*v);
        // "8/10" reads as 8.
        std::size_t j = i;
        while (j < s.size() && s[j] == ' ') ++j;
        if (j < s.size() && s[j] == '/') {
            ++j;
            while (j < s.size() && s[j] == ' ') ++j;
            const std::size_t k = j + 2;
            const bool longer = k < s.size() && (is_digit(s[k]) || (s[k] == '.' && k + 1 < s.size() && is_digit(s[k + 1])));
            if (s.compare(j, 2, "10") == 0 && !longer) i = k;
        }
    }
    return out;
}

bool in_scale(double v) { return v >= 0.0 && v <= 10.0; }

}  // namespace

namespace {

void strip_once(std::string_view text, ParsedCompletion& out) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t open = text.find(kOpen, pos);
        const std::size_t close = text.find(kClose, pos);
        if (open == std::string_view::npos && close == std::string_view::npos) {
            out.final_answer_region.append(text.substr(pos));
            break;
        }
        if (close != std::string_view::npos && (open == std::string_view::npos || close < open)) {
            out.reasoning.append(text.substr(pos, close - pos));
            pos = close + kClose.size();
            continue;
        }
        out.final_answer_region.append(text.substr(pos, open - pos));
        const std::size_t body = open + kOpen.size();
        const std::size_t end = text.find(kClose, body);
        if (end == std::string_view::npos) {
            out.reasoning.append(text.substr(body));
            break;
        }
        out.reasoning.append(text.substr(body, end - body));
        pos = end + kClose.size();
    }
}

}  // namespace

ParsedCompletion strip_think(std::string_view text) {
    ParsedCompletion out;
    out.source_len = text.size();
    strip_once(text, out);
    // Removing a span can splice a new marker together ("<thi<think></think>nk>").
    while (out.final_answer_region.find(kOpen) != std::string::npos ||
           out.final_answer_region.find(kClose) != std::string::npos) {
        const std::string region = std::move(out.final_answer_region);
        out.final_answer_region.clear();
        strip_once(region, out);
    }
    return out;
}

VerifierJudgment parse_ratings(std::string_view region) {
    VerifierJudgment j;
    j.rating_a = kNaN;
    j.rating_b = kNaN;
    if (trim(region).empty()) {
        j.parse_status = ParseStatus::malformed;
        return j;
    }
    std::optional<RatingPair> found = boxed_pair(region);
    if (!found) found = labeled_pair(region);
    if (!found) {
        auto nums = bare_numbers(region);
        if (nums.size() >= 2) found = RatingPair{nums[nums.size() - 2], nums.back()};
    }
    if (!found) {
        j.parse_status = ParseStatus::missing_ratings;
        return j;
    }
    j.rating_a = found->a;
    j.rating_b = found->b;
    j.parse_status = in_scale(found->a) && in_scale(found->b) ? ParseStatus::ok : ParseStatus::out_of_range;
    return j;
}

VerifierJudgment judge_completion(std::string_view completion) {
    ParsedCompletion parsed = strip_think(completion);
    VerifierJudgment j = parse_ratings(parsed.final_answer_region);
    j.reasoning = std::move(parsed.reasoning);
    return j;
}

std::optional<std::string> extract_boxed(std::string_view text) {
    static constexpr std::string_view kBox = "\\boxed";
    std::optional<std::string> last;
    std::size_t pos = 0;
    while ((pos = text.find(kBox, pos)) != std::string_view::npos) {
        std::size_t i = pos + kBox.size();
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size() || text[i] != '{') {
            pos += kBox.size();
            continue;
        }
        int depth = 0;
        std::size_t close = std::string_view::npos;
        for (std::size_t k = i; k < text.size(); ++k) {
            if (text[k] == '{') ++depth;
            else if (text[k] == '}' && --depth == 0) {
                close = k;
                break;
            }
        }
        if (close == std::string_view::npos) return std::nullopt;
        last = std::string(text.substr(i + 1, close - i - 1));
        pos = close + 1;
    }
    return last;
}

bool answers_equivalent(std::string_view a, std::string_view b, const EquivalenceOracle& oracle) {
    if (oracle) {
        try {
            if (auto verdict = oracle(a, b)) return *verdict;
        } catch (...) {
        }
    }
    try {
        if (normalize_answer(a) == normalize_answer(b)) return true;
    } catch (...) {
        return false;
    }
    const auto va = try_evaluate(a);
    const auto vb = try_evaluate(b);
    if (!va || !vb) return false;
    if (*va == *vb) return true;
    return std::abs(*va - *vb) <= kEquivalenceRelTol * std::max(std::abs(*va), std::abs(*vb));
}

}  // namespace everify::verdict

#include "everify/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace everify::verdict {

namespace {

constexpr int kMaxDepth = 256;

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
    return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

// Index one past the brace matching the '{' at `open`, or npos.
std::size_t match_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        else if (s[i] == '}' && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
}

// Replaces "\name" (not followed by a letter) with `repl`.
std::string replace_command(std::string_view s, std::string_view name, std::string_view repl) {
    std::string out;
    out.reserve(s.size());
    const std::string needle = "\\" + std::string(name);
    std::size_t i = 0;
    while (i < s.size()) {
        if (s.compare(i, needle.size(), needle) == 0) {
            const std::size_t after = i + needle.size();
            const bool letter_follows = is_alpha(name.back()) && after < s.size() && is_alpha(s[after]);
            if (!letter_follows) {
                out += repl;
                i = after;
                continue;
            }
        }
        out += s[i++];
    }
    return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

// \text{abc} -> abc for the given wrapper commands.
std::string unwrap_command(std::string s, std::string_view name) {
    const std::string needle = "\\" + std::string(name) + "{";
    std::size_t pos = 0;
    while ((pos = s.find(needle, pos)) != std::string::npos) {
        const std::size_t open = pos + needle.size() - 1;
        const std::size_t close = match_brace(s, open);
        if (close == std::string::npos) break;
        s = s.substr(0, pos) + s.substr(open + 1, close - open - 2) + s.substr(close);
    }
    return s;
}

// Strips one layer of math-mode delimiters or a whole-string \boxed{}.
bool strip_outer(std::string& s) {
    struct Delim {
        std::string_view open, close;
    };
    static constexpr Delim delims[] = {{"$$", "$$"}, {"$", "$"}, {"\\(", "\\)"}, {"\\[", "\\]"}};
    for (const auto& d : delims) {
        if (s.size() >= d.open.size() + d.close.size() && starts_with(s, d.open) && ends_with(s, d.close)) {
            s = trim(std::string_view(s).substr(d.open.size(), s.size() - d.open.size() - d.close.size()));
            return true;
        }
    }
    for (std::string_view box : {std::string_view("\\boxed{"), std::string_view("\\fbox{")}) {
        if (starts_with(s, box)) {
            const std::size_t close = match_brace(s, box.size() - 1);
            if (close == s.size()) {
                s = trim(std::string_view(s).substr(box.size(), s.size() - box.size() - 1));
                return true;
            }
        }
    }
    return false;
}

bool is_grouped_thousands(std::string_view run) {
    // ^\d{1,3}(,\d{3})+$
    std::size_t i = 0;
    while (i < run.size() && is_digit(run[i])) ++i;
    if (i == 0 || i > 3 || i == run.size()) return false;
    while (i < run.size()) {
        if (run[i] != ',' || i + 4 > run.size()) return false;
        for (std::size_t k = i + 1; k < i + 4; ++k)
            if (!is_digit(run[k])) return false;
        i += 4;
    }
    return true;
}

std::string drop_thousands_separators(std::string_view s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_digit(s[i]) || (i > 0 && (is_digit(s[i - 1]) || s[i - 1] == '.'))) {
            out += s[i++];
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && (is_digit(s[j]) || s[j] == ',')) ++j;
        while (j > i && s[j - 1] == ',') --j;
        const std::string_view run = s.substr(i, j - i);
        if (is_grouped_thousands(run)) {
            for (char c : run)
                if (c != ',') out += c;
        } else {
            out += run;
        }
        i = j;
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    double parse() {
        const double v = parse_expr();
        if (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == ',' || c == ';') fail(ExprErrorKind::non_single_value, "multiple values");
            fail(ExprErrorKind::parse_error, std::string("unexpected '") + c + "'");
        }
        if (!std::isfinite(v)) fail(ExprErrorKind::parse_error, "non-finite value");
        return v;
    }

private:
    [[noreturn]] void fail(ExprErrorKind kind, const std::string& msg) const {
        throw ExpressionError(kind, msg + " at offset " + std::to_string(pos_));
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void expect(char c) {
        if (peek() != c) fail(ExprErrorKind::parse_error, std::string("expected '") + c + "'");
        ++pos_;
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p_(p) {
            if (++p_.depth_ > kMaxDepth) p_.fail(ExprErrorKind::parse_error, "nesting too deep");
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    bool starts_primary() const {
        const char c = peek();
        return is_digit(c) || c == '.' || c == '(' || c == '{' || c == '[' || c == '\\' || is_alpha(c);
    }

    double parse_expr() {
        DepthGuard guard(*this);
        double v = parse_term();
        while (peek() == '+' || peek() == '-') {
            const char op = s_[pos_++];
            const double rhs = parse_term();
            v = op == '+' ? v + rhs : v - rhs;
        }
        return v;
    }

    double parse_term() {
        double v = parse_unary();
        for (;;) {
            if (peek() == '*') {
                ++pos_;
                v *= parse_unary();
            } else if (peek() == '/') {
                ++pos_;
                v /= parse_unary();
            } else if (starts_primary()) {
                v *= parse_power();
            } else {
                return v;
            }
        }
    }

    double parse_unary() {
        DepthGuard guard(*this);
        if (peek() == '-') {
            ++pos_;
            return -parse_unary();
        }
        if (peek() == '+') {
            ++pos_;
            return parse_unary();
        }
        return parse_power();
    }

    double parse_power() {
        DepthGuard guard(*this);
        const double base = parse_primary();
        if (peek() != '^') return base;
        ++pos_;
        double sign = 1.0;
        while (peek() == '-' || peek() == '+') {
            if (s_[pos_] == '-') sign = -sign;
            ++pos_;
        }
        return std::pow(base, sign * parse_power());
    }

    double parse_number() {
        const std::size_t start = pos_;
        bool dot = false;
        while (pos_ < s_.size() && (is_digit(s_[pos_]) || (s_[pos_] == '.' && !dot))) {
            if (s_[pos_] == '.') dot = true;
            ++pos_;
        }
        std::string_view lit = s_.substr(start, pos_ - start);
        if (lit == ".") fail(ExprErrorKind::parse_error, "lone decimal point");
        std::string buf(lit);
        if (buf.front() == '.') buf.insert(buf.begin(), '0');
        if (buf.back() == '.') buf.pop_back();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
        if (ec != std::errc() || ptr != buf.data() + buf.size()) fail(ExprErrorKind::parse_error, "bad number");
        return v;
    }

    double parse_group(char open, char close) {
        expect(open);
        const double v = parse_expr();
        expect(close);
        return v;
    }

    // Argument of \frac or \sqrt: a braced group or a single token.
    double parse_argument() {
        const char c = peek();
        if (c == '{') return parse_group('{', '}');
        if (is_digit(c)) {
            ++pos_;
            return static_cast<double>(c - '0');
        }
        if (c == '\\' || is_alpha(c)) return parse_primary();
        fail(ExprErrorKind::parse_error, "expected argument");
    }

    double parse_command() {
        ++pos_;  // backslash
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_alpha(s_[pos_])) ++pos_;
        const std::string_view name = s_.substr(start, pos_ - start);
        if (name.empty()) fail(ExprErrorKind::parse_error, "bare backslash");
        if (name == "frac") {
            const double num = parse_argument();
            const double den = parse_argument();
            return num / den;
        }
        if (name == "sqrt") {
            double index = 2.0;
            if (peek() == '[') index = parse_group('[', ']');
            const double radicand = parse_argument();
            if (index == 2.0) return std::sqrt(radicand);
            if (radicand < 0.0 && std::fmod(index, 2.0) == 1.0) return -std::pow(-radicand, 1.0 / index);
            return std::pow(radicand, 1.0 / index);
        }
        if (name == "pi") return std::numbers::pi;
        fail(ExprErrorKind::free_symbol, "unsupported command \\" + std::string(name));
    }

    double parse_primary() {
        const char c = peek();
        if (is_digit(c) || c == '.') return parse_number();
        if (c == '(') return parse_group('(', ')');
        if (c == '{') return parse_group('{', '}');
        if (c == '[') return parse_group('[', ']');
        if (c == '\\') return parse_command();
        if (is_alpha(c)) fail(ExprErrorKind::free_symbol, std::string("free symbol '") + c + "'");
        if (c == '\0') fail(ExprErrorKind::parse_error, "unexpected end of expression");
        fail(ExprErrorKind::parse_error, std::string("unexpected '") + c + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

std::string_view to_string(ExprErrorKind k) {
    switch (k) {
        case ExprErrorKind::parse_error: return "parse_error";
        case ExprErrorKind::free_symbol: return "free_symbol";
        case ExprErrorKind::non_single_value: return "non_single_value";
    }
    return "parse_error";
}

std::string normalize_answer(std::string_view text) {
    std::string s = trim(text);
    while (strip_outer(s)) {
    }
    for (std::string_view cmd : {"left", "right", "displaystyle"}) s = replace_command(s, cmd, "");
    s = replace_command(s, "dfrac", "\\frac");
    s = replace_command(s, "tfrac", "\\frac");
    s = replace_command(s, "cdot", "*");
    s = replace_command(s, "times", "*");
    s = replace_command(s, "div", "/");
    s = replace_all(std::move(s), "^{\\circ}", "");
    s = replace_all(std::move(s), "^\\circ", "");
    s = replace_command(s, "circ", "");
    for (std::string_view sp : {"\\!", "\\,", "\\;", "\\:", "\\ "}) s = replace_all(std::move(s), sp, "");
    s = replace_all(std::move(s), "{,}", "");
    for (std::string_view w : {"text", "textbf", "mathrm", "mathbf", "mbox"}) s = unwrap_command(std::move(s), w);
    std::string compact;
    compact.reserve(s.size());
    for (char c : s)
        if (!is_space(c) && c != '$' && c != '~') compact += c;
    compact = drop_thousands_separators(compact);
    while (!compact.empty() && compact.back() == '.') compact.pop_back();
    return compact;
}

double evaluate_expression(std::string_view text) {
    const std::string s = normalize_answer(text);
    if (s.empty()) throw ExpressionError(ExprErrorKind::parse_error, "empty expression");
    if (s.find("\\pm") != std::string::npos || s.find("\\mp") != std::string::npos ||
        s.find("\xC2\xB1") != std::string::npos) {
        throw ExpressionError(ExprErrorKind::non_single_value, "plus-minus denotes two values");
    }
    return Parser(s).parse();
}

std::optional<double> try_evaluate(std::string_view text) noexcept {
    try {
        return evaluate_expression(text);
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace everify::verdict

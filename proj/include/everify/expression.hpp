#pragma once

// Numeric-expression evaluator for final answers and ground truths.
//
// Accepted grammar: integers, decimals, a/b, \frac{a}{b} (also \dfrac,
// \tfrac, \frac12), + - * / ^, \cdot, \times, \div, parentheses or braces,
// unary minus, implicit multiplication (2\sqrt{3}), \sqrt{x}, \sqrt[n]{x}
// and \pi. Common LaTeX wrappers ($...$, \boxed{}, \text{}, \left/\right,
// thin spaces, degree marks, thousands separators) are removed first.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace everify::verdict {

enum class ExprErrorKind { parse_error, free_symbol, non_single_value };

std::string_view to_string(ExprErrorKind k);

class ExpressionError : public std::runtime_error {
public:
    ExpressionError(ExprErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ExprErrorKind kind() const noexcept { return kind_; }

private:
    ExprErrorKind kind_;
};

/// Canonical textual form used for exact answer comparison.
std::string normalize_answer(std::string_view text);

/// Evaluates a single numeric expression. Throws ExpressionError.
double evaluate_expression(std::string_view text);

std::optional<double> try_evaluate(std::string_view text) noexcept;

}  // namespace everify::verdict

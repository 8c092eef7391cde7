#pragma once

// Completion parsing: think-span stripping, rating extraction, boxed-answer
// extraction and answer equivalence.

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "everify/core.hpp"
#include "everify/expression.hpp"

namespace everify::verdict {

struct ParsedCompletion {
    /// Concatenated contents of every think span.
    std::string reasoning;
    /// Text outside the think spans, markers removed.
    std::string final_answer_region;
    std::size_t source_len = 0;
};

/// Splits a completion into reasoning and final-answer text.
///
/// Every `<think>...</think>` span is reasoning. An unclosed `<think>` makes
/// the rest of the text reasoning. A `</think>` with no opener (chat
/// templates that pre-fill the opening tag) makes everything before it, back
/// to the previous span, reasoning.
ParsedCompletion strip_think(std::string_view text);

/// Extracts two ratings from the post-think text. Rules are tried in order,
/// first success wins:
///   1. the last `\boxed{x, y}` or `\boxed{x; y}`
///   2. labeled values `Response A: 8` / `Rating B = 3` / `Score for response A: 7`
///      (case-insensitive, last occurrence of each label)
///   3. the last two bare numbers (a trailing "/10" is ignored)
/// An empty region is `malformed`; fewer than two ratings is
/// `missing_ratings`; a rating outside [0,10] is `out_of_range` with the raw
/// values preserved. The returned reasoning is empty.
VerifierJudgment parse_ratings(std::string_view region);

/// strip_think followed by parse_ratings, with reasoning filled in.
VerifierJudgment judge_completion(std::string_view completion);

/// Content of the last `\boxed{...}` with balanced braces. An unbalanced last
/// box yields nullopt.
std::optional<std::string> extract_boxed(std::string_view text);

/// Optional external checker. Returning nullopt defers to the built-in rules.
using EquivalenceOracle = std::function<std::optional<bool>(std::string_view, std::string_view)>;

/// True when the normalized strings match or both sides evaluate to numbers
/// within relative tolerance 1e-9. Never throws.
bool answers_equivalent(std::string_view a, std::string_view b, const EquivalenceOracle& oracle = {});

inline constexpr double kEquivalenceRelTol = 1e-9;

}  // namespace everify::verdict

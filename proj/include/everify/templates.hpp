#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace everify {

/// Prompt templates with {question}, {response_a}, {response_b},
/// {reasoning}, {rating_a} and {rating_b} placeholders.
struct PromptTemplates {
    std::string generator;
    std::string verifier;
    /// Reflection prompt when the verifier produced usable ratings.
    std::string reflect;
    /// Reflection prompt without ratings (verifier parse failure, or the
    /// verifier-free consistency baseline).
    std::string reflect_unrated;

    static PromptTemplates defaults();
};

/// Single-pass substitution: only the known placeholders are replaced and
/// substituted values are never re-scanned. Other braces (LaTeX) are kept.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Loads a template file minus one trailing newline; throws ValidationError
/// when it does not exist.
std::string load_template(const std::filesystem::path& path);

}  // namespace everify

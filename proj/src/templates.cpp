#include "everify/templates.hpp"

#include "everify/core.hpp"
#include "everify/json_io.hpp"

namespace everify {

namespace {

constexpr std::string_view kGenerator =
    R"({question}

Please reason step by step, and put your final answer within \boxed{}.)";

constexpr std::string_view kVerifier =
    R"(You are given a math question and two candidate responses. Judge the correctness of each response independently. Both, one, or neither may be correct.

Question:
{question}

Response A:
{response_a}

Response B:
{response_b}

Reason carefully inside <think></think> tags. Then rate each response on a continuous scale from 0 (certainly incorrect) to 10 (certainly correct), in exactly this format:
Response A: <rating>
Response B: <rating>)";

constexpr std::string_view kReflect =
    R"(You are given a math question, two candidate responses, and a verifier's assessment of them.

Question:
{question}

Response A (verifier rating {rating_a}/10):
{response_a}

Response B (verifier rating {rating_b}/10):
{response_b}

Verifier reasoning:
{reasoning}

Using the assessment as feedback, solve the question and put your final answer within \boxed{}.)";

constexpr std::string_view kReflectUnrated =
    R"(You are given a math question and two candidate responses.

Question:
{question}

Response A:
{response_a}

Response B:
{response_b}

Check both responses for consistency and errors, solve the question, and put your final answer within \boxed{}.)";

}  // namespace

PromptTemplates PromptTemplates::defaults() {
    return {std::string(kGenerator), std::string(kVerifier), std::string(kReflect), std::string(kReflectUnrated)};
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const std::size_t close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string load_template(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ValidationError("template file not found: " + path.string());
    std::string text = read_file(path);
    if (text.ends_with("\r\n")) text.resize(text.size() - 2);
    else if (text.ends_with('\n')) text.pop_back();
    return text;
}

}  // namespace everify

#include "everify/tokenizer.hpp"

namespace everify {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           c >= 0x80;
}

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::int64_t ApproxTokenizer::count(std::string_view text) const {
    std::int64_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            if (!in_word) ++n;
            in_word = true;
        } else {
            in_word = false;
            if (!is_space_byte(c)) ++n;
        }
    }
    return n;
}

const Tokenizer& default_tokenizer() {
    static const ApproxTokenizer tok;
    return tok;
}

}  // namespace everify

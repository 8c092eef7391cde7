#pragma once

#include <cstdint>
#include <string_view>

namespace everify {

/// Counts model tokens in a string. Implementations must be thread-safe.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::int64_t count(std::string_view text) const = 0;
};

/// Approximate tokenizer: every maximal run of word characters is one token,
/// every other non-space character is one token, whitespace is free.
/// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
class ApproxTokenizer final : public Tokenizer {
public:
    std::int64_t count(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

}  // namespace everify

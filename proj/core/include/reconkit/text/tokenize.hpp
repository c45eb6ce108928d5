#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reconkit::text {

/// Lowercased word tokens of a caption, with the text they came from.
struct TokenSequence {
    std::vector<std::string> tokens;
    std::string source_text;

    std::size_t size() const noexcept { return tokens.size(); }
    bool empty() const noexcept { return tokens.empty(); }
};

/// Lowercases, splits at whitespace and punctuation, and drops the
/// punctuation. Digits are word characters. Input is UTF-8; code points above
/// ASCII count as word characters unless they fall in a punctuation block.
TokenSequence tokenize(std::string_view text);

/// Tokens joined by single spaces.
std::string join(const TokenSequence& seq);

}  // namespace reconkit::text

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace reconkit::backends {

/// Counts and truncates prompt tokens for one backend's tokenizer.
class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::size_t count(std::string_view text) const = 0;
    /// Longest prefix of text holding at most max_tokens tokens.
    virtual std::string truncate(std::string_view text, std::size_t max_tokens) const = 0;
};

/// Whitespace-delimited words; the default approximation when a backend's
/// tokenizer is not available locally.
class WhitespaceTokenCounter final : public TokenCounter {
public:
    std::size_t count(std::string_view text) const override;
    std::string truncate(std::string_view text, std::size_t max_tokens) const override;
};

const TokenCounter& whitespace_tokens();

}  // namespace reconkit::backends

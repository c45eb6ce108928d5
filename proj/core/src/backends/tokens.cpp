#include "reconkit/backends/tokens.hpp"

#include <cctype>

namespace reconkit::backends {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::size_t WhitespaceTokenCounter::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

std::string WhitespaceTokenCounter::truncate(std::string_view text, std::size_t max_tokens) const {
    std::size_t n = 0;
    bool in_word = false;
    std::size_t end = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (is_space(text[i])) {
            if (in_word && n == max_tokens) break;
            in_word = false;
        } else {
            if (!in_word) {
                if (n == max_tokens) break;
                in_word = true;
                ++n;
            }
            end = i + 1;
        }
    }
    return std::string(text.substr(0, end));
}

const TokenCounter& whitespace_tokens() {
    static const WhitespaceTokenCounter counter;
    return counter;
}

}  // namespace reconkit::backends

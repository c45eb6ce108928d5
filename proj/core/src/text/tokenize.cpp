#include "reconkit/text/tokenize.hpp"

#include <cstdint>

namespace reconkit::text {

namespace {

// Decodes one UTF-8 code point starting at text[i]; malformed bytes decode to
// themselves so tokenization never fails.
char32_t decode(std::string_view text, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= text.size()) return -1;
        const auto b = static_cast<unsigned char>(text[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0) {
        if (int c1 = cont(1); c1 >= 0) {
            i += 2;
            return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
        }
    } else if ((b0 & 0xF0) == 0xE0) {
        int c1 = cont(1), c2 = cont(2);
        if (c1 >= 0 && c2 >= 0) {
            i += 3;
            return (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
        }
    } else if ((b0 & 0xF8) == 0xF0) {
        int c1 = cont(1), c2 = cont(2), c3 = cont(3);
        if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
            i += 4;
            return (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) | (char32_t(c2) << 6) |
                   char32_t(c3);
        }
    }
    i += 1;
    return b0;
}

void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;  // ordinals, micro
    if (cp == 0xD7 || cp == 0xF7) return false;                     // multiply, divide
    if (cp >= 0x2000 && cp <= 0x206F) return false;                 // general punctuation
    if (cp >= 0x2190 && cp <= 0x2BFF) return false;                 // arrows, symbols
    if (cp >= 0x3000 && cp <= 0x303F) return false;                 // CJK punctuation
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
    if (cp >= 0xFF01 && cp <= 0xFF0F) return false;  // fullwidth punctuation
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    return true;
}

char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x17F && cp != 0x130 && cp != 0x138 && cp != 0x149 && cp != 0x178) {
        // Latin Extended-A alternates upper/lower, with a parity shift in 0x139..0x148 and 0x179..0x17E.
        const bool shifted = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
        const bool upper = shifted ? (cp % 2 == 1) : (cp % 2 == 0);
        return upper ? cp + 1 : cp;
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;  // Greek
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                  // Cyrillic
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
    TokenSequence seq;
    seq.source_text = std::string(text);
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = decode(text, i);
        if (is_word_char(cp)) {
            encode(to_lower(cp), current);
        } else if (!current.empty()) {
            seq.tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) seq.tokens.push_back(std::move(current));
    return seq;
}

std::string join(const TokenSequence& seq) {
    std::string out;
    for (const auto& t : seq.tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

}  // namespace reconkit::text

#include "reconkit/recon/prompt.hpp"

#include "reconkit/error.hpp"

namespace reconkit::recon {
namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::string assemble(std::string_view caption) {
    std::string out;
    out.reserve(kPerspectivePrefix.size() + caption.size() + kPerspectiveSuffix.size() + 2);
    out.append(kPerspectivePrefix).append(" ").append(caption).append(" ").append(kPerspectiveSuffix);
    return out;
}

}  // namespace

std::size_t caption_token_budget(std::size_t max_prompt_tokens, const backends::TokenCounter& counter) {
    const std::size_t overhead = counter.count(kPerspectivePrefix) + counter.count(kPerspectiveSuffix);
    if (max_prompt_tokens <= overhead)
        throw Error("token-limit", "prompt template needs more than " + std::to_string(max_prompt_tokens) + " tokens");
    return max_prompt_tokens - overhead;
}

std::string fit_caption(std::string_view caption, std::size_t max_prompt_tokens,
                        const backends::TokenCounter& counter) {
    const std::string_view trimmed = trim(caption);
    if (trimmed.empty()) throw Error("empty-caption", "caption is blank");
    std::size_t budget = caption_token_budget(max_prompt_tokens, counter);
    std::string fitted = std::string(trim(counter.truncate(trimmed, budget)));
    // Subword tokenizers need not be additive across the joins.
    while (!fitted.empty() && counter.count(assemble(fitted)) > max_prompt_tokens && budget > 0) {
        --budget;
        fitted = std::string(trim(counter.truncate(trimmed, budget)));
    }
    if (fitted.empty()) throw Error("empty-caption", "no caption tokens fit the prompt budget");
    return fitted;
}

std::string wrap_perspective_prompt(std::string_view caption, std::size_t max_prompt_tokens,
                                    const backends::TokenCounter& counter) {
    return assemble(fit_caption(caption, max_prompt_tokens, counter));
}

}  // namespace reconkit::recon

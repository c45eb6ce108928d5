#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "reconkit/backends/tokens.hpp"

namespace reconkit::recon {

/// Perspective constraint wrapped around every caption before text-to-image
/// generation.
inline constexpr std::string_view kPerspectivePrefix =
    "I want a remote sensing image with a realistic satellite perspective view.";
inline constexpr std::string_view kPerspectiveSuffix =
    "Remember, I want a vertical remote sensing satellite perspective from top to bottom.";

/// Bumped whenever the wrapper text changes; part of every cache key.
inline constexpr std::string_view kPromptTemplateVersion = "perspective-v1";

/// Caption tokens available once prefix and suffix are paid for. Throws
/// "token-limit" when the template alone does not fit.
std::size_t caption_token_budget(std::size_t max_prompt_tokens,
                                 const backends::TokenCounter& counter = backends::whitespace_tokens());

/// Trimmed caption cut so that the wrapped prompt fits max_prompt_tokens.
/// Throws "empty-caption" when nothing but whitespace is left.
std::string fit_caption(std::string_view caption, std::size_t max_prompt_tokens,
                        const backends::TokenCounter& counter = backends::whitespace_tokens());

/// prefix + " " + caption + " " + suffix, with the caption cut per fit_caption.
std::string wrap_perspective_prompt(std::string_view caption, std::size_t max_prompt_tokens = 512,
                                    const backends::TokenCounter& counter = backends::whitespace_tokens());

}  // namespace reconkit::recon

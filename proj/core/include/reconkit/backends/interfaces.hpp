#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reconkit/backends/tokens.hpp"
#include "reconkit/backends/types.hpp"
#include "reconkit/image.hpp"

namespace reconkit::backends {

/// Common part of every model role. Implementations must be callable from
/// several threads at once.
class Backend {
public:
    virtual ~Backend() = default;
    virtual const BackendDescriptor& descriptor() const = 0;
    /// True for backends whose answers are computed locally (mocks, replay);
    /// their calls are ledgered with zero duration.
    virtual bool simulated() const { return false; }
};

/// Caption generator M.
class CaptionModel : public Backend {
public:
    virtual std::string caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                                std::int64_t nonce) = 0;
    /// Text-only completion, used for offline dataset preparation.
    virtual std::string complete(std::string_view prompt, double temperature, std::int64_t nonce) = 0;
};

/// Text-to-image generator G with fixed weights; returns encoded image bytes.
class ImageGenerator : public Backend {
public:
    virtual std::vector<std::uint8_t> generate(std::string_view prompt, const GenerationParams& params,
                                               ImageSize size) = 0;
};

/// Image feature extractor F_phi; returns the raw (unnormalized) feature.
class ImageEmbedder : public Backend {
public:
    virtual std::vector<double> embed(const ImageRecord& image) = 0;
};

/// Joint image/text embedder used by the CLIP-style comparison score.
class CrossModalEmbedder : public Backend {
public:
    virtual std::vector<double> embed_text(std::string_view text) = 0;
    virtual std::vector<double> embed_image(const ImageRecord& image) = 0;
    virtual std::size_t token_limit() const = 0;
    virtual const TokenCounter& token_counter() const { return whitespace_tokens(); }
};

}  // namespace reconkit::backends

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "reconkit/backends/interfaces.hpp"

namespace reconkit::backends {

// Deterministic stand-ins for the four model roles. Every output is a pure
// function of the descriptor identity and the request, so separate processes
// agree byte for byte.

class MockCaptionModel final : public CaptionModel {
public:
    explicit MockCaptionModel(BackendDescriptor descriptor, std::set<std::int64_t> empty_nonces = {});

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }

    /// Text depends on (image id, nonce) only; temperature 0 ignores the nonce.
    /// Nonces in empty_nonces return an empty string.
    std::string caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                        std::int64_t nonce) override;
    /// Rewrites the text following the last "Input:" line with a fixed
    /// synonym table; stands in for paraphrase/perturbation prompts.
    std::string complete(std::string_view prompt, double temperature, std::int64_t nonce) override;

private:
    BackendDescriptor descriptor_;
    std::set<std::int64_t> empty_nonces_;
};

/// Seeded pseudorandom RGB field keyed by (prompt, seed, steps), PNG-encoded
/// at exactly the requested size.
class MockImageGenerator final : public ImageGenerator {
public:
    explicit MockImageGenerator(BackendDescriptor descriptor);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<std::uint8_t> generate(std::string_view prompt, const GenerationParams& params,
                                       ImageSize size) override;

private:
    BackendDescriptor descriptor_;
};

enum class MockTransform { None, Rotate, Negate };

struct MockEmbedderOptions {
    std::size_t dim = 64;
    /// Seeds the base feature of each image checksum. Embedders sharing a
    /// base seed differ only by their transform.
    std::uint64_t base_seed = 0;
    MockTransform transform = MockTransform::None;
    std::uint64_t transform_seed = 1;
};

/// Base feature: uniform [-1, 1) components seeded by the image checksum.
/// Rotate applies a fixed orthogonal map (a product of Householder
/// reflections), so all inner products match the untransformed embedder.
class MockImageEmbedder final : public ImageEmbedder {
public:
    MockImageEmbedder(BackendDescriptor descriptor, MockEmbedderOptions options = {});

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<double> embed(const ImageRecord& image) override;

private:
    BackendDescriptor descriptor_;
    MockEmbedderOptions options_;
    std::vector<std::vector<double>> reflections_;
};

class MockCrossModalEmbedder final : public CrossModalEmbedder {
public:
    MockCrossModalEmbedder(BackendDescriptor descriptor, std::size_t token_limit = 77, std::size_t dim = 64);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<double> embed_text(std::string_view text) override;
    std::vector<double> embed_image(const ImageRecord& image) override;
    std::size_t token_limit() const override { return token_limit_; }

private:
    BackendDescriptor descriptor_;
    std::size_t token_limit_;
    std::size_t dim_;
};

BackendDescriptor mock_descriptor(Role role);

}  // namespace reconkit::backends

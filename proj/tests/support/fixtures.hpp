#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "reconkit/backends/clients.hpp"
#include "reconkit/backends/config.hpp"
#include "reconkit/digest.hpp"
#include "reconkit/image.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return RECONKIT_TEST_DATA; }

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        const auto base = std::filesystem::temp_directory_path();
        for (;;) {
            path_ = base / ("reconkit-test-" + std::to_string(rd()) + std::to_string(rd()));
            if (std::filesystem::create_directory(path_)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Pseudorandom RGB PNG.
inline reconkit::ImageRecord random_image(std::uint64_t seed, int w = 16, int h = 12, std::string id = {}) {
    reconkit::SplitMix64 rng(seed);
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w * h * 3));
    for (auto& b : rgb) b = static_cast<std::uint8_t>(rng.next() & 0xFF);
    if (id.empty()) id = "img-" + std::to_string(seed);
    return reconkit::image_from_bytes(std::move(id), reconkit::encode_png_rgb(rgb, {w, h}));
}

inline std::shared_ptr<reconkit::backends::ModelClients> mock_clients(
    const std::filesystem::path& blob_root,
    reconkit::backends::BackendSet set = reconkit::backends::build_backends(reconkit::backends::BackendConfig::mock())) {
    return std::make_shared<reconkit::backends::ModelClients>(
        std::move(set), std::make_shared<reconkit::backends::CallLedger>(),
        std::make_shared<reconkit::BlobStore>(blob_root), reconkit::backends::RetryPolicy{3, std::chrono::milliseconds(1)});
}

/// Embedder that maps the original image to a fixed unit axis and any other
/// image (a reconstruction) to `other`.
class FixedEmbedder final : public reconkit::backends::ImageEmbedder {
public:
    FixedEmbedder(std::string original_checksum, std::vector<double> original, std::vector<double> other)
        : descriptor_{reconkit::backends::Role::ImageEmbed, "local", "fixed-embedder", "1"},
          original_checksum_(std::move(original_checksum)),
          original_(std::move(original)),
          other_(std::move(other)) {}

    const reconkit::backends::BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<double> embed(const reconkit::ImageRecord& image) override {
        return image.checksum == original_checksum_ ? original_ : other_;
    }

private:
    reconkit::backends::BackendDescriptor descriptor_;
    std::string original_checksum_;
    std::vector<double> original_;
    std::vector<double> other_;
};

/// Increments one of the four generation parameters (0 seed, 1 steps,
/// 2 max_prompt_tokens, 3 max_dim_px).
inline void bump_param(reconkit::backends::GenerationParams& p, int field) {
    switch (field) {
        case 0: ++p.seed; break;
        case 1: ++p.steps; break;
        case 2: ++p.max_prompt_tokens; break;
        default: ++p.max_dim_px; break;
    }
}

}  // namespace fixtures

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace reconkit {

struct ImageSize {
    int width = 0;
    int height = 0;

    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// An encoded image, addressed by the SHA-256 of its bytes.
struct ImageRecord {
    std::string id;
    std::string checksum;
    ImageSize size;
    std::string format;  // "png" or "ppm"
    std::shared_ptr<const std::vector<std::uint8_t>> bytes;
};

/// Decodes (fully, to validate) PNG or binary PPM/PGM bytes. Throws
/// "undecodable-image".
ImageRecord image_from_bytes(std::string id, std::vector<std::uint8_t> bytes);

/// Reads and decodes a file; throws "missing-image" when it does not exist.
ImageRecord load_image(const std::filesystem::path& path, std::string id);

/// 8-bit RGB PNG encoding; `rgb` holds width * height * 3 bytes.
std::vector<std::uint8_t> encode_png_rgb(std::span<const std::uint8_t> rgb, ImageSize size);

/// Size of a reconstruction: the original when its longest side fits in
/// max_dim, otherwise scaled down with the longest side equal to max_dim and
/// the aspect ratio preserved (rounded, at least 1 px).
ImageSize reconstruction_size(ImageSize original, int max_dim);

}  // namespace reconkit

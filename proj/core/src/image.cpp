#include "reconkit/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

namespace reconkit {

namespace {

bool is_png(const std::vector<std::uint8_t>& b) {
    static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    return b.size() >= 8 && std::memcmp(b.data(), kSig, 8) == 0;
}

ImageSize decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw Error("undecodable-image", std::string("png: ") + img.message);
    img.format = PNG_FORMAT_RGB;
    std::vector<png_byte> pixels(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw Error("undecodable-image", "png: " + msg);
    }
    return {static_cast<int>(img.width), static_cast<int>(img.height)};
}

// Binary PGM (P5) or PPM (P6) with maxval <= 255.
ImageSize decode_pnm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 2;
    auto next_int = [&]() -> long {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        long v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            any = true;
            if (v > 1'000'000) break;
        }
        if (!any) throw Error("undecodable-image", "pnm: malformed header");
        return v;
    };
    const long channels = bytes[1] == '6' ? 3 : 1;
    const long w = next_int(), h = next_int(), maxval = next_int();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw Error("undecodable-image", "pnm: unsupported dimensions or maxval");
    ++pos;  // single whitespace before the raster
    const auto need = static_cast<std::size_t>(w * h * channels);
    if (bytes.size() < pos + need) throw Error("undecodable-image", "pnm: truncated raster");
    return {static_cast<int>(w), static_cast<int>(h)};
}

}  // namespace

ImageRecord image_from_bytes(std::string id, std::vector<std::uint8_t> bytes) {
    ImageRecord rec;
    rec.id = std::move(id);
    if (is_png(bytes)) {
        rec.size = decode_png(bytes);
        rec.format = "png";
    } else if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        rec.size = decode_pnm(bytes);
        rec.format = "ppm";
    } else {
        throw Error("undecodable-image", "unrecognized format for '" + rec.id + "'");
    }
    rec.checksum = sha256_hex(bytes);
    rec.bytes = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
    return rec;
}

ImageRecord load_image(const std::filesystem::path& path, std::string id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing-image", path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return image_from_bytes(std::move(id), std::move(bytes));
}

std::vector<std::uint8_t> encode_png_rgb(std::span<const std::uint8_t> rgb, ImageSize size) {
    if (size.width <= 0 || size.height <= 0 ||
        rgb.size() != static_cast<std::size_t>(size.width) * static_cast<std::size_t>(size.height) * 3)
        throw Error("invalid-argument", "pixel buffer does not match image size");
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(size.width);
    img.height = static_cast<png_uint_32>(size.height);
    img.format = PNG_FORMAT_RGB;
    png_alloc_size_t out_size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &out_size, 0, rgb.data(), 0, nullptr))
        throw Error("encode-failed", img.message);
    std::vector<std::uint8_t> out(out_size);
    if (!png_image_write_to_memory(&img, out.data(), &out_size, 0, rgb.data(), 0, nullptr))
        throw Error("encode-failed", img.message);
    out.resize(out_size);
    return out;
}

ImageSize reconstruction_size(ImageSize original, int max_dim) {
    if (original.width <= 0 || original.height <= 0 || max_dim <= 0)
        throw Error("invalid-argument", "image and max dimension must be positive");
    const int longest = std::max(original.width, original.height);
    if (longest <= max_dim) return original;
    const double scale = static_cast<double>(max_dim) / longest;
    auto scaled = [&](int v) { return std::max(1, static_cast<int>(std::lround(v * scale))); };
    if (original.width >= original.height) return {max_dim, scaled(original.height)};
    return {scaled(original.width), max_dim};
}

}  // namespace reconkit

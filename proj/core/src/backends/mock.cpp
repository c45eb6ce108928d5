#include "reconkit/backends/mock.hpp"

#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"
#include "reconkit/text/tokenize.hpp"

namespace reconkit::backends {

namespace {

constexpr std::array<std::string_view, 12> kScenes{
    "harbor", "airport", "residential area", "farmland", "parking lot", "forest",
    "river bend", "industrial park", "stadium", "highway interchange", "beach", "railway station"};
constexpr std::array<std::string_view, 12> kObjects{
    "boat", "airplane", "house", "tree", "car", "warehouse",
    "storage tank", "tennis court", "bridge", "road", "building", "field"};
constexpr std::array<std::string_view, 8> kColors{"white", "gray", "red", "dark green",
                                                  "blue", "brown", "light gray", "yellow"};
constexpr std::array<std::string_view, 8> kRelations{"next to",      "along",  "surrounding", "north of",
                                                     "south of",     "beside", "across from", "between"};
constexpr std::array<std::string_view, 6> kCounts{"two", "three", "several", "many", "four", "dozens of"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, SplitMix64& rng) {
    return words[rng.below(N)];
}

const std::map<std::string, std::string>& synonyms() {
    static const std::map<std::string, std::string> table{
        {"large", "big"},     {"big", "large"},       {"small", "little"}, {"many", "numerous"},
        {"several", "some"},  {"next", "adjacent"},   {"car", "vehicle"},  {"cars", "vehicles"},
        {"house", "home"},    {"houses", "homes"},    {"road", "street"},  {"roads", "streets"},
        {"boat", "ship"},     {"boats", "ships"},     {"tree", "plant"},   {"trees", "plants"},
        {"building", "structure"}, {"buildings", "structures"},          {"image", "scene"},
    };
    return table;
}

std::vector<double> uniform_vector(std::uint64_t seed, std::size_t dim) {
    SplitMix64 rng(seed);
    std::vector<double> v(dim);
    for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
    return v;
}

}  // namespace

BackendDescriptor mock_descriptor(Role role) {
    switch (role) {
        case Role::Caption: return {role, "mock://caption", "mock-captioner", "v1"};
        case Role::TextToImage: return {role, "mock://t2i", "mock-t2i", "v1"};
        case Role::ImageEmbed: return {role, "mock://image-embed", "mock-embedder", "v1"};
        case Role::CrossModalEmbed: return {role, "mock://crossmodal", "mock-clip", "v1"};
    }
    throw Error("invalid-argument", "unknown role");
}

// ---------------------------------------------------------------- caption

MockCaptionModel::MockCaptionModel(BackendDescriptor descriptor, std::set<std::int64_t> empty_nonces)
    : descriptor_(std::move(descriptor)), empty_nonces_(std::move(empty_nonces)) {}

std::string MockCaptionModel::caption(const ImageRecord& image, std::string_view, double temperature,
                                      std::int64_t nonce) {
    if (empty_nonces_.count(nonce)) return "";
    const std::int64_t effective = temperature == 0.0 ? 0 : nonce;
    SplitMix64 rng(seed_from(descriptor_.identity() + "|" + image.id + "|" + std::to_string(effective)));
    std::ostringstream out;
    out << "This remote sensing image shows a " << pick(kScenes, rng) << ".";
    const auto sentences = 1 + rng.below(4);
    for (std::uint64_t s = 0; s < sentences; ++s) {
        out << " There are " << pick(kCounts, rng) << ' ' << pick(kColors, rng) << ' ' << pick(kObjects, rng)
            << "s " << pick(kRelations, rng) << " the " << pick(kObjects, rng) << '.';
    }
    return out.str();
}

std::string MockCaptionModel::complete(std::string_view prompt, double, std::int64_t nonce) {
    const auto marker = prompt.rfind("Input:");
    const std::string_view input = marker == std::string_view::npos ? prompt : prompt.substr(marker + 6);
    const auto tokens = text::tokenize(input).tokens;
    SplitMix64 rng(seed_from(descriptor_.identity() + "|complete|" + std::string(prompt) + "|" +
                             std::to_string(nonce)));
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        auto it = synonyms().find(t);
        out += (it != synonyms().end() && rng.below(2) == 0) ? it->second : t;
    }
    if (!out.empty()) out.push_back('.');
    return out;
}

// ---------------------------------------------------------------- t2i

MockImageGenerator::MockImageGenerator(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

std::vector<std::uint8_t> MockImageGenerator::generate(std::string_view prompt, const GenerationParams& params,
                                                       ImageSize size) {
    if (size.width <= 0 || size.height <= 0) throw Error("invalid-argument", "non-positive image size");
    SplitMix64 rng(seed_from(descriptor_.identity() + "|" + std::string(prompt) + "|" +
                             std::to_string(params.seed) + "|" + std::to_string(params.steps)));
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size.width) * static_cast<std::size_t>(size.height) * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 8) {
        std::uint64_t word = rng.next();
        for (std::size_t b = 0; b < 8 && i + b < rgb.size(); ++b) rgb[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
    }
    return encode_png_rgb(rgb, size);
}

// ---------------------------------------------------------------- image embed

MockImageEmbedder::MockImageEmbedder(BackendDescriptor descriptor, MockEmbedderOptions options)
    : descriptor_(std::move(descriptor)), options_(options) {
    if (options_.dim == 0) throw Error("invalid-argument", "mock embedder dim must be positive");
    if (options_.transform == MockTransform::Rotate) {
        for (std::uint64_t r = 0; r < 3; ++r) {
            auto v = uniform_vector(options_.transform_seed * 7919 + r, options_.dim);
            double norm2 = 0.0;
            for (double x : v) norm2 += x * x;
            const double norm = std::sqrt(norm2);
            for (double& x : v) x /= norm;
            reflections_.push_back(std::move(v));
        }
    }
}

std::vector<double> MockImageEmbedder::embed(const ImageRecord& image) {
    auto v = uniform_vector(seed_from(std::to_string(options_.base_seed) + "|" + image.checksum), options_.dim);
    switch (options_.transform) {
        case MockTransform::None: break;
        case MockTransform::Negate:
            for (double& x : v) x = -x;
            break;
        case MockTransform::Rotate:
            // H = I - 2uu^T for each unit u; the product is orthogonal.
            for (const auto& u : reflections_) {
                double dot = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) dot += u[i] * v[i];
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= 2.0 * dot * u[i];
            }
            break;
    }
    return v;
}

// ---------------------------------------------------------------- cross-modal

MockCrossModalEmbedder::MockCrossModalEmbedder(BackendDescriptor descriptor, std::size_t token_limit, std::size_t dim)
    : descriptor_(std::move(descriptor)), token_limit_(token_limit), dim_(dim) {}

std::vector<double> MockCrossModalEmbedder::embed_text(std::string_view text) {
    return uniform_vector(seed_from(descriptor_.identity() + "|text|" + text::join(text::tokenize(text))), dim_);
}

std::vector<double> MockCrossModalEmbedder::embed_image(const ImageRecord& image) {
    return uniform_vector(seed_from(descriptor_.identity() + "|image|" + image.checksum), dim_);
}

}  // namespace reconkit::backends

#include "reconkit/backends/replay.hpp"

#include "reconkit/error.hpp"

namespace reconkit::backends {

namespace {

nlohmann::json lookup(const ReplaySource& source, const BackendDescriptor& d, const std::string& key) {
    auto response = source.ledger->find_response(role_name(d.role), key);
    if (!response) throw Error("replay-missing", std::string(role_name(d.role)) + " request " + key);
    return *response;
}

std::vector<double> vector_of(const nlohmann::json& response) {
    return response.at("vector").get<std::vector<double>>();
}

}  // namespace

ReplayCaptionModel::ReplayCaptionModel(BackendDescriptor descriptor, ReplaySource source)
    : descriptor_(std::move(descriptor)), source_(std::move(source)) {}

std::string ReplayCaptionModel::caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                                        std::int64_t nonce) {
    return lookup(source_, descriptor_,
                  caption_request_key(descriptor_, image.checksum, system_prompt, temperature, nonce))
        .at("text")
        .get<std::string>();
}

std::string ReplayCaptionModel::complete(std::string_view prompt, double temperature, std::int64_t nonce) {
    return lookup(source_, descriptor_, completion_request_key(descriptor_, prompt, temperature, nonce))
        .at("text")
        .get<std::string>();
}

ReplayImageGenerator::ReplayImageGenerator(BackendDescriptor descriptor, ReplaySource source)
    : descriptor_(std::move(descriptor)), source_(std::move(source)) {}

std::vector<std::uint8_t> ReplayImageGenerator::generate(std::string_view prompt, const GenerationParams& params,
                                                         ImageSize size) {
    const auto response = lookup(source_, descriptor_, image_request_key(descriptor_, prompt, params, size));
    const auto checksum = response.at("blob").get<std::string>();
    auto bytes = source_.blobs->get(checksum);
    if (!bytes) throw Error("replay-missing", "blob " + checksum);
    return std::move(*bytes);
}

ReplayImageEmbedder::ReplayImageEmbedder(BackendDescriptor descriptor, ReplaySource source)
    : descriptor_(std::move(descriptor)), source_(std::move(source)) {}

std::vector<double> ReplayImageEmbedder::embed(const ImageRecord& image) {
    return vector_of(lookup(source_, descriptor_, embed_image_request_key(descriptor_, image.checksum)));
}

ReplayCrossModalEmbedder::ReplayCrossModalEmbedder(BackendDescriptor descriptor, std::size_t token_limit,
                                                   ReplaySource source)
    : descriptor_(std::move(descriptor)), token_limit_(token_limit), source_(std::move(source)) {}

std::vector<double> ReplayCrossModalEmbedder::embed_text(std::string_view text) {
    return vector_of(lookup(source_, descriptor_, embed_text_request_key(descriptor_, text)));
}

std::vector<double> ReplayCrossModalEmbedder::embed_image(const ImageRecord& image) {
    return vector_of(lookup(source_, descriptor_, embed_image_request_key(descriptor_, image.checksum)));
}

}  // namespace reconkit::backends

#include "reconkit/backends/clients.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "reconkit/error.hpp"

namespace reconkit::backends {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

template <typename T>
T& require(const std::shared_ptr<T>& backend, std::string_view role) {
    if (!backend) throw Error("missing-backend", "no " + std::string(role) + " backend configured");
    return *backend;
}

}  // namespace

ModelClients::ModelClients(BackendSet backends, std::shared_ptr<CallLedger> ledger, std::shared_ptr<BlobStore> blobs,
                           RetryPolicy retry)
    : backends_(std::move(backends)),
      ledger_(std::move(ledger)),
      blobs_(std::move(blobs)),
      retry_(retry),
      dims_(std::make_shared<DimRegistry>()) {
    if (!ledger_) ledger_ = std::make_shared<CallLedger>();
    if (retry_.max_attempts < 1) retry_.max_attempts = 1;
}

template <typename Fn>
auto ModelClients::call_with_retry(Fn&& fn) const -> decltype(fn()) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= retry_.max_attempts) throw;
            std::this_thread::sleep_for(retry_.base_delay * (1 << (attempt - 1)));
        }
    }
}

void ModelClients::record(const Backend& backend, std::string_view role, const std::string& key, double duration_ms,
                          nlohmann::json response) const {
    ledger_->record({std::string(role), backend.descriptor().identity(), key, "miss",
                     backend.simulated() ? 0.0 : duration_ms, std::move(response)});
}

namespace {

template <typename Fn>
auto timed(Fn&& fn, double& elapsed_ms) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    auto result = fn();
    elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace

CaptionCandidate ModelClients::generate_caption(const ImageRecord& image, std::string_view system_prompt,
                                                double temperature, std::int64_t nonce) {
    auto& model = require(backends_.caption, "caption");
    if (!(temperature >= 0.0)) throw Error("invalid-argument", "temperature must be >= 0");
    const auto key = caption_request_key(model.descriptor(), image.checksum, system_prompt, temperature, nonce);
    double ms = 0.0;
    std::string text =
        timed([&] { return call_with_retry([&] { return model.caption(image, system_prompt, temperature, nonce); }); }, ms);
    record(model, "caption", key, ms, {{"text", text}});
    if (is_blank(text))
        throw Error("empty-generation", "caption backend returned no text for '" + image.id + "' nonce " +
                                            std::to_string(nonce));
    return {0, std::move(text), temperature, nonce, model.descriptor().identity()};
}

std::string ModelClients::complete_text(std::string_view prompt, double temperature, std::int64_t nonce) {
    auto& model = require(backends_.caption, "caption");
    const auto key = completion_request_key(model.descriptor(), prompt, temperature, nonce);
    double ms = 0.0;
    std::string text =
        timed([&] { return call_with_retry([&] { return model.complete(prompt, temperature, nonce); }); }, ms);
    record(model, "caption", key, ms, {{"text", text}});
    if (is_blank(text)) throw Error("empty-generation", "completion returned no text");
    return text;
}

ImageRecord ModelClients::generate_image(std::string_view prompt, const GenerationParams& params, ImageSize size) {
    auto& generator = require(backends_.t2i, "t2i");
    params.validate();
    if (size.width <= 0 || size.height <= 0) throw Error("invalid-argument", "requested image size must be positive");
    if (std::max(size.width, size.height) > params.max_dim_px)
        throw Error("invalid-argument", "requested size exceeds max_dim_px");
    const auto tokens = whitespace_tokens().count(prompt);
    if (tokens > static_cast<std::size_t>(params.max_prompt_tokens))
        throw Error("token-limit", "prompt has " + std::to_string(tokens) + " tokens; limit is " +
                                       std::to_string(params.max_prompt_tokens));
    const auto key = image_request_key(generator.descriptor(), prompt, params, size);
    double ms = 0.0;
    auto bytes = timed([&] { return call_with_retry([&] { return generator.generate(prompt, params, size); }); }, ms);
    ImageRecord image = image_from_bytes("", std::move(bytes));
    image.id = "recon-" + image.checksum.substr(0, 16);
    if (blobs_) blobs_->put(*image.bytes);
    record(generator, "t2i", key, ms, {{"blob", image.checksum}});

    if (std::max(image.size.width, image.size.height) > params.max_dim_px)
        throw Error("bad-dimensions", "generated image exceeds max_dim_px");
    const double want = static_cast<double>(size.width) / size.height;
    const double got = static_cast<double>(image.size.width) / image.size.height;
    if (std::fabs(got - want) / want > 0.02)
        throw Error("bad-dimensions", "generated aspect ratio " + std::to_string(got) + " differs from requested " +
                                          std::to_string(want));
    return image;
}

EmbeddingVector ModelClients::checked_embedding(const Backend& backend, std::vector<double> raw) {
    EmbeddingVector v(std::move(raw), backend.descriptor().identity());
    std::lock_guard lock(dims_->mutex);
    auto [it, inserted] = dims_->dims.emplace(v.backend(), v.dim());
    if (!inserted && it->second != v.dim())
        throw Error("dim-mismatch", v.backend() + " returned dim " + std::to_string(v.dim()) + ", expected " +
                                        std::to_string(it->second));
    return v;
}

EmbeddingVector ModelClients::embed_image(const ImageRecord& image) {
    auto& embedder = require(backends_.image_embedder, "image-embed");
    const auto key = embed_image_request_key(embedder.descriptor(), image.checksum);
    double ms = 0.0;
    auto raw = timed([&] { return call_with_retry([&] { return embedder.embed(image); }); }, ms);
    record(embedder, "image-embed", key, ms, {{"vector", raw}});
    return checked_embedding(embedder, std::move(raw));
}

EmbeddingVector ModelClients::embed_crossmodal_text(std::string_view text) {
    auto& embedder = require(backends_.crossmodal, "crossmodal-embed");
    if (is_blank(text)) throw Error("empty-input", "cross-modal text is empty");
    const auto tokens = embedder.token_counter().count(text);
    if (tokens > embedder.token_limit())
        throw Error("token-limit", "text has " + std::to_string(tokens) + " tokens; limit is " +
                                       std::to_string(embedder.token_limit()));
    const auto key = embed_text_request_key(embedder.descriptor(), text);
    double ms = 0.0;
    auto raw = timed([&] { return call_with_retry([&] { return embedder.embed_text(text); }); }, ms);
    record(embedder, "crossmodal-embed", key, ms, {{"vector", raw}});
    return checked_embedding(embedder, std::move(raw));
}

EmbeddingVector ModelClients::embed_crossmodal_image(const ImageRecord& image) {
    auto& embedder = require(backends_.crossmodal, "crossmodal-embed");
    const auto key = embed_image_request_key(embedder.descriptor(), image.checksum);
    double ms = 0.0;
    auto raw = timed([&] { return call_with_retry([&] { return embedder.embed_image(image); }); }, ms);
    record(embedder, "crossmodal-embed", key, ms, {{"vector", raw}});
    return checked_embedding(embedder, std::move(raw));
}

ModelClients ModelClients::with_image_embedder(std::shared_ptr<ImageEmbedder> embedder) const {
    BackendSet set = backends_;
    set.image_embedder = std::move(embedder);
    ModelClients out(std::move(set), ledger_, blobs_, retry_);
    out.dims_ = dims_;
    return out;
}

}  // namespace reconkit::backends

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "reconkit/backends/interfaces.hpp"
#include "reconkit/backends/ledger.hpp"
#include "reconkit/blob_store.hpp"

namespace reconkit::backends {

struct BackendSet {
    std::shared_ptr<CaptionModel> caption;
    std::shared_ptr<ImageGenerator> t2i;
    std::shared_ptr<ImageEmbedder> image_embedder;
    std::shared_ptr<CrossModalEmbedder> crossmodal;
};

/// Bounded exponential backoff; only TransportError is retried.
struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{250};
};

/// The model-role operations used by scoring and captioning. Wraps a
/// BackendSet with input validation, retries, the call ledger and the blob
/// store. Safe to share between threads.
class ModelClients {
public:
    ModelClients(BackendSet backends, std::shared_ptr<CallLedger> ledger, std::shared_ptr<BlobStore> blobs,
                 RetryPolicy retry = {});

    /// Throws "invalid-argument" for negative temperature and
    /// "empty-generation" when the backend returns only whitespace.
    CaptionCandidate generate_caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                                      std::int64_t nonce);
    std::string complete_text(std::string_view prompt, double temperature, std::int64_t nonce);

    /// The prompt must already fit params.max_prompt_tokens ("token-limit"
    /// otherwise). The result is stored in the blob store; a result larger
    /// than max_dim_px or off the requested aspect ratio throws "bad-dimensions".
    ImageRecord generate_image(std::string_view prompt, const GenerationParams& params, ImageSize size);

    /// Unit-norm feature. A dimension change within one backend throws "dim-mismatch".
    EmbeddingVector embed_image(const ImageRecord& image);

    /// Cross-modal text embedding; "empty-input" for blank text and
    /// "token-limit" (with the limit in the message) above the backend limit.
    EmbeddingVector embed_crossmodal_text(std::string_view text);
    EmbeddingVector embed_crossmodal_image(const ImageRecord& image);

    /// Same clients with a different image embedder (encoder ablations).
    ModelClients with_image_embedder(std::shared_ptr<ImageEmbedder> embedder) const;

    const BackendSet& backends() const noexcept { return backends_; }
    const std::shared_ptr<CallLedger>& ledger() const noexcept { return ledger_; }
    const std::shared_ptr<BlobStore>& blobs() const noexcept { return blobs_; }

private:
    template <typename Fn>
    auto call_with_retry(Fn&& fn) const -> decltype(fn());

    void record(const Backend& backend, std::string_view role, const std::string& key, double duration_ms,
                nlohmann::json response) const;
    EmbeddingVector checked_embedding(const Backend& backend, std::vector<double> raw);

    BackendSet backends_;
    std::shared_ptr<CallLedger> ledger_;
    std::shared_ptr<BlobStore> blobs_;
    RetryPolicy retry_;

    struct DimRegistry {
        std::mutex mutex;
        std::map<std::string, std::size_t> dims;
    };
    std::shared_ptr<DimRegistry> dims_;
};

}  // namespace reconkit::backends

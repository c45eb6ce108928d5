#pragma once

#include <memory>

#include "reconkit/backends/interfaces.hpp"
#include "reconkit/backends/ledger.hpp"
#include "reconkit/blob_store.hpp"

namespace reconkit::backends {

/// Recorded responses of an earlier run: its ledger plus its blob store.
struct ReplaySource {
    std::shared_ptr<const CallLedger> ledger;
    std::shared_ptr<const BlobStore> blobs;
};

// Backends that answer from a ReplaySource. A request absent from the ledger
// throws "replay-missing".

class ReplayCaptionModel final : public CaptionModel {
public:
    ReplayCaptionModel(BackendDescriptor descriptor, ReplaySource source);
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::string caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                        std::int64_t nonce) override;
    std::string complete(std::string_view prompt, double temperature, std::int64_t nonce) override;

private:
    BackendDescriptor descriptor_;
    ReplaySource source_;
};

class ReplayImageGenerator final : public ImageGenerator {
public:
    ReplayImageGenerator(BackendDescriptor descriptor, ReplaySource source);
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<std::uint8_t> generate(std::string_view prompt, const GenerationParams& params,
                                       ImageSize size) override;

private:
    BackendDescriptor descriptor_;
    ReplaySource source_;
};

class ReplayImageEmbedder final : public ImageEmbedder {
public:
    ReplayImageEmbedder(BackendDescriptor descriptor, ReplaySource source);
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<double> embed(const ImageRecord& image) override;

private:
    BackendDescriptor descriptor_;
    ReplaySource source_;
};

class ReplayCrossModalEmbedder final : public CrossModalEmbedder {
public:
    ReplayCrossModalEmbedder(BackendDescriptor descriptor, std::size_t token_limit, ReplaySource source);
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    bool simulated() const override { return true; }
    std::vector<double> embed_text(std::string_view text) override;
    std::vector<double> embed_image(const ImageRecord& image) override;
    std::size_t token_limit() const override { return token_limit_; }

private:
    BackendDescriptor descriptor_;
    std::size_t token_limit_;
    ReplaySource source_;
};

}  // namespace reconkit::backends

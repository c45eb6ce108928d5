#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "reconkit/backends/types.hpp"
#include "reconkit/image.hpp"

namespace reconkit::recon {

struct ReconScoreResult {
    double score = 0.0;   // (cosine + 1) / 2, in [0, 1]
    double cosine = 0.0;  // in [-1, 1]
    std::string wrapped_prompt;
    std::string image_checksum;          // original image
    std::string reconstructed_image;     // blob checksum
    ImageSize reconstructed_size;
    backends::GenerationParams params;
    std::string t2i_backend;
    std::string embedder_backend;
    std::string cache_key;
    bool cache_hit = false;

    nlohmann::json to_json() const;
    static ReconScoreResult from_json(const nlohmann::json& j);
};

/// Digest over everything that determines a reconstruction score except the
/// original image: fitted caption, both backend identity triples, generation
/// parameters and the prompt template version.
struct CacheKey {
    std::string digest;

    static CacheKey compute(std::string_view fitted_caption, const backends::BackendDescriptor& t2i,
                            const backends::BackendDescriptor& embedder, const backends::GenerationParams& params,
                            std::string_view template_version);

    /// Key of one (caption, image) evaluation.
    std::string with_image(const std::string& image_checksum) const;
};

/// Exact-match result cache. With a directory it persists to an append-only
/// records.jsonl (scores) and t2i.jsonl (first observed image per generation
/// request), and reloads both on open. The first writer of a key wins.
class ReconCache {
public:
    ReconCache() = default;
    explicit ReconCache(std::filesystem::path dir);

    std::optional<ReconScoreResult> find(const std::string& key) const;
    /// False (and no write) when the key is already present.
    bool insert(const std::string& key, const ReconScoreResult& result);

    std::optional<std::string> t2i_observation(const std::string& request_key) const;
    /// Returns the canonical (first) checksum for the request.
    std::string observe_t2i(const std::string& request_key, const std::string& checksum);

    std::size_t size() const;

    /// Rewrites both logs sorted by key, so the directory no longer depends on
    /// the order concurrent writers arrived in.
    void compact();

private:
    void append(const std::filesystem::path& file, const nlohmann::json& line);

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::map<std::string, ReconScoreResult> records_;
    std::map<std::string, std::string> t2i_;
};

}  // namespace reconkit::recon

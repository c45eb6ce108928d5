#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reconkit/backends/clients.hpp"
#include "reconkit/recon/cache.hpp"

namespace reconkit::recon {

inline constexpr double kCosineTolerance = 1e-6;

/// (cosine + 1) / 2. Cosines within kCosineTolerance outside [-1, 1] are
/// clamped; anything further out throws "embedding-not-normalized".
double normalized_score(double cosine);

struct EvaluationContext {
    std::shared_ptr<backends::ModelClients> clients;
    backends::GenerationParams params;
    std::shared_ptr<ReconCache> cache;  // may be null
    std::size_t parallelism = 1;
    /// Copies every reconstruction here as <image id>__<key prefix>.<ext>.
    std::optional<std::filesystem::path> dump_dir;
};

struct ScoringPair {
    ImageRecord image;
    std::string caption;
};

struct ScoreOutcome {
    std::optional<ReconScoreResult> result;
    std::string error_code;
    std::string error_message;

    bool ok() const noexcept { return result.has_value(); }
};

/// Reconstruction score: wrap the caption, render it, embed original and
/// rendering, and map their cosine to [0, 1].
class ReconScorer {
public:
    explicit ReconScorer(EvaluationContext ctx);

    ReconScoreResult score(const ImageRecord& image, std::string_view caption);

    /// Results in input order. Repeated pairs are computed once (later copies
    /// report cache_hit), misses run on ctx.parallelism threads and are
    /// committed to the cache in input order. Failures are reported per pair.
    std::vector<ScoreOutcome> score_batch(std::span<const ScoringPair> pairs);

    const EvaluationContext& context() const noexcept { return ctx_; }

private:
    struct Prepared {
        std::string fitted_caption;
        std::string key;
    };
    Prepared prepare(const ImageRecord& image, std::string_view caption) const;
    ReconScoreResult compute(const ImageRecord& image, const Prepared& prepared);
    void record_lookup(const std::string& key, bool hit, const ReconScoreResult* result) const;

    EvaluationContext ctx_;
};

/// CLIP-style reference-free score 2.5 * max(cos(image, text), 0) from the
/// cross-modal backend. Token-limit errors propagate with the limit.
double clip_style_score(backends::ModelClients& clients, const ImageRecord& image, std::string_view caption);

}  // namespace reconkit::recon

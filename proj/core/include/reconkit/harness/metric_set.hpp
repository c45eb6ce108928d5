#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reconkit/backends/clients.hpp"
#include "reconkit/image.hpp"
#include "reconkit/recon/recon_score.hpp"

namespace reconkit::harness {

enum class MetricKind { ReferenceBased, ReferenceFree };

std::string_view metric_kind_label(MetricKind kind);

struct MetricItem {
    ImageRecord image;
    std::string candidate;
    std::vector<std::string> references;
};

/// Per-item values on the x100 scale; a missing value carries its error.
struct ItemScores {
    std::vector<std::optional<double>> values;
    std::vector<std::string> errors;

    std::size_t failures() const;
    /// First recorded error, or empty.
    std::string first_error() const;
};

struct HarnessMetric {
    std::string id;    // config name, e.g. "bleu4"
    std::string name;  // display name, e.g. "BLEU-4"
    MetricKind kind = MetricKind::ReferenceBased;
    /// False for metrics listed for completeness but not computed (SPICE).
    bool available = true;
    std::string note;
    std::function<ItemScores(std::span<const MetricItem>)> score;
    /// Corpus-level aggregate; when empty the mean of present item values is used.
    std::function<double(std::span<const MetricItem>)> corpus;
};

/// Aggregate over the items whose score is present; nullopt when none is.
std::optional<double> aggregate(const HarnessMetric& metric, std::span<const MetricItem> items,
                                const ItemScores& scores);

struct MetricContext {
    std::shared_ptr<recon::ReconScorer> scorer;            // for "reconscore"
    std::shared_ptr<backends::ModelClients> clients;       // for "clipscore"
    std::size_t parallelism = 1;
    /// Add-epsilon smoothing for per-item (sentence) BLEU, which otherwise
    /// collapses to 0 whenever a higher-order n-gram has no match.
    bool smooth_sentence_bleu = true;
};

/// Resolves metric names: bleu1..bleu4 ("bleu" expands to all four), meteor,
/// rouge-l ("rouge"), cider-d ("cider"), spice, clipscore, reconscore.
/// Throws "unknown-metric".
std::vector<HarnessMetric> make_metrics(const std::vector<std::string>& names, const MetricContext& ctx);

/// Reference-based block followed by reference-free block.
std::vector<std::string> default_metric_names();

}  // namespace reconkit::harness

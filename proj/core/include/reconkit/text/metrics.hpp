#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reconkit/text/tokenize.hpp"

namespace reconkit::text {

enum class MetricId { Bleu1, Bleu2, Bleu3, Bleu4, Meteor, RougeL, CiderD };

std::string_view metric_name(MetricId id);

/// Metric value on the x100 scale. CIDEr-D is unbounded above 100.
struct MetricScore {
    MetricId metric;
    double value = 0.0;
    std::vector<double> per_instance;
};

struct EvalInstance {
    std::string instance_id;
    TokenSequence candidate;
    std::vector<TokenSequence> references;
};

EvalInstance make_instance(std::string id, std::string_view candidate,
                           std::span<const std::string> references);

enum class BleuLevel { Corpus, Sentence };

struct BleuOptions {
    int max_n = 4;
    BleuLevel level = BleuLevel::Corpus;
    /// Add-epsilon on zero n-gram matches. Only affects sentence level.
    bool smoothing = false;
};

inline constexpr double kBleuSmoothingEpsilon = 1e-9;

/// BLEU-max_n. Corpus level pools clipped counts and lengths across instances;
/// sentence level averages per-instance scores. per_instance always holds the
/// sentence-level values.
MetricScore bleu(std::span<const EvalInstance> instances, const BleuOptions& options = {});

/// METEOR with exact and Porter-stem matching stages (no synonym stage),
/// best over references.
MetricScore meteor(const EvalInstance& instance);
/// Mean of per-instance METEOR.
MetricScore meteor(std::span<const EvalInstance> instances);

inline constexpr double kRougeBeta = 1.2;

/// ROUGE-L F-measure, best over references.
MetricScore rouge_l(const EvalInstance& instance);
MetricScore rouge_l(std::span<const EvalInstance> instances);

/// CIDEr-D with document frequencies built once from a corpus of reference
/// sets (one document per set). Immutable after construction.
class CiderD {
public:
    static constexpr int kMaxN = 4;
    static constexpr double kSigma = 6.0;

    explicit CiderD(std::span<const std::vector<TokenSequence>> reference_sets);

    /// Score of one candidate against its references, x100 scale.
    double score(const TokenSequence& candidate, std::span<const TokenSequence> references) const;

    std::size_t corpus_size() const noexcept { return corpus_size_; }

private:
    std::map<std::vector<std::string>, double> document_frequency_;
    std::size_t corpus_size_ = 0;
    double log_corpus_size_ = 0.0;
};

/// Corpus mean CIDEr-D; throws "idf-degenerate" for fewer than 2 instances.
MetricScore cider_d(std::span<const EvalInstance> instances);

/// n-gram multiset of a token list.
using NgramCounts = std::map<std::vector<std::string>, int>;
NgramCounts count_ngrams(std::span<const std::string> tokens, int n);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace reconkit::text

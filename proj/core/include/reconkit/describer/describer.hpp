#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reconkit/backends/clients.hpp"
#include "reconkit/recon/recon_score.hpp"

namespace reconkit::describer {

inline constexpr double kDefaultTemperature = 0.8;
inline constexpr int kDefaultCandidates = 10;

/// Captioning instruction sent as the system prompt for every candidate.
std::string_view task_prompt();

struct FailedSlot {
    std::int64_t nonce = 0;
    std::string error_code;
    std::string message;
};

/// Candidates keep the index of their position (1..size, contiguous); slots
/// that failed twice are listed separately and shrink the set.
struct CandidateSet {
    std::string image_id;
    std::vector<backends::CaptionCandidate> candidates;
    std::vector<FailedSlot> failed;
    double temperature = kDefaultTemperature;
    int requested = 0;

    nlohmann::json to_json() const;
};

/// Nonce of the single retry granted to an empty generation in slot `nonce`.
constexpr std::int64_t retry_nonce(std::int64_t nonce) noexcept { return -nonce; }

/// n generations with nonces 1..n under task_prompt(). An empty generation
/// is retried once with retry_nonce(); a second failure (or any other backend
/// error) marks the slot failed. Throws "no-candidates" if every slot fails.
CandidateSet sample_candidates(backends::ModelClients& clients, const ImageRecord& image, int n, double temperature,
                               std::size_t parallelism = 1);

struct Argmax {
    int index = 0;  // 1-based
    double value = 0.0;
    bool tie_broken = false;
};

/// Maximum over the present scores; ties go to the smallest index. Throws
/// "no-candidates" when nothing is present.
Argmax argmax_first(std::span<const std::optional<double>> scores);

struct SelectionResult {
    int best_index = 0;  // 1-based into CandidateSet::candidates
    std::string best_caption;
    double best_score = 0.0;
    std::vector<std::optional<double>> scores;  // aligned to candidates; empty when scoring failed
    std::vector<std::optional<recon::ReconScoreResult>> results;
    std::vector<std::string> errors;  // aligned; empty string when scored
    bool tie_broken = false;

    nlohmann::json to_json() const;
};

/// Scores every candidate and keeps the best; candidates whose scoring fails
/// are excluded and their error kept.
SelectionResult select_best(recon::ReconScorer& scorer, const ImageRecord& image, const CandidateSet& set);

/// Selection restricted to the first k candidates of an already scored set.
SelectionResult select_prefix(const SelectionResult& full, const CandidateSet& set, std::size_t k);

struct DescribeOptions {
    int n = kDefaultCandidates;
    double temperature = kDefaultTemperature;
    std::size_t parallelism = 1;
};

struct DescribeResult {
    std::string caption;
    SelectionResult selection;
    CandidateSet candidates;

    nlohmann::json to_json() const;
};

DescribeResult describe(recon::ReconScorer& scorer, const ImageRecord& image, const DescribeOptions& options = {});

}  // namespace reconkit::describer

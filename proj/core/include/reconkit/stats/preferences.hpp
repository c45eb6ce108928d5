#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reconkit/stats/kendall.hpp"

namespace reconkit::stats {

struct PreferenceCandidate {
    std::string model;
    std::string text;
};

/// One image with K candidate captions; ranking[i] is the human rank of
/// candidates[i], 1 = best.
struct PreferenceInstance {
    std::string image_id;
    std::vector<PreferenceCandidate> candidates;
    std::vector<int> ranking;
    /// Extra fields carried through untouched (annotator, adjudicated, ...).
    nlohmann::json extra = nlohmann::json::object();
};

/// Throws "not-a-permutation" unless ranks is a permutation of 1..ranks.size().
void validate_ranking(const std::vector<int>& ranks);

/// Reads the {"image_id", "candidates", "ranking"} JSON Lines format. When
/// require_ranking is false the ranking may be absent (unranked pools for the
/// annotation service).
std::vector<PreferenceInstance> load_preferences(const std::filesystem::path& path,
                                                 bool require_ranking = true);
void save_preferences(const std::filesystem::path& path, const std::vector<PreferenceInstance>& data);
nlohmann::json to_json(const PreferenceInstance& p);
PreferenceInstance preference_from_json(const nlohmann::json& j, bool require_ranking = true);

enum class FlattenMode {
    /// All candidates of all instances in one list; every cross-instance pair counts.
    Global,
    /// Same list, but only pairs within one instance count.
    PerInstance,
};

/// scores[i][k] scores instance i's k-th candidate (aligned with `dataset`).
/// std::nullopt marks a missing score.
using CandidateScores = std::vector<std::vector<std::optional<double>>>;

/// Emits (score, K + 1 - rank) per candidate in (instance, candidate) order.
/// Throws "missing-score" naming the instance and candidate.
PairedSample flatten_preferences(const std::vector<PreferenceInstance>& dataset,
                                 const CandidateScores& scores, FlattenMode mode = FlattenMode::Global);

}  // namespace reconkit::stats

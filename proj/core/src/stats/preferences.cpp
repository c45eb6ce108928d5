#include "reconkit/stats/preferences.hpp"

#include <algorithm>
#include <fstream>

#include "reconkit/error.hpp"

namespace reconkit::stats {

void validate_ranking(const std::vector<int>& ranks) {
    if (ranks.empty()) throw Error("not-a-permutation", "empty ranking");
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != static_cast<int>(i) + 1)
            throw Error("not-a-permutation", "ranking must be a permutation of 1.." + std::to_string(ranks.size()));
}

PreferenceInstance preference_from_json(const nlohmann::json& j, bool require_ranking) {
    PreferenceInstance p;
    p.image_id = j.at("image_id").get<std::string>();
    for (const auto& c : j.at("candidates"))
        p.candidates.push_back({c.value("model", std::string{}), c.at("text").get<std::string>()});
    if (j.contains("ranking")) {
        p.ranking = j.at("ranking").get<std::vector<int>>();
        if (p.ranking.size() != p.candidates.size())
            throw Error("invalid-preference", "ranking length differs from candidate count for '" + p.image_id + "'");
        validate_ranking(p.ranking);
    } else if (require_ranking) {
        throw Error("invalid-preference", "missing ranking for '" + p.image_id + "'");
    }
    for (const auto& [key, value] : j.items())
        if (key != "image_id" && key != "candidates" && key != "ranking") p.extra[key] = value;
    return p;
}

nlohmann::json to_json(const PreferenceInstance& p) {
    nlohmann::json j = p.extra;
    j["image_id"] = p.image_id;
    j["candidates"] = nlohmann::json::array();
    for (const auto& c : p.candidates) j["candidates"].push_back({{"model", c.model}, {"text", c.text}});
    j["ranking"] = p.ranking;
    return j;
}

std::vector<PreferenceInstance> load_preferences(const std::filesystem::path& path, bool require_ranking) {
    std::ifstream in(path);
    if (!in) throw Error("unreadable-preferences", "cannot open " + path.string());
    std::vector<PreferenceInstance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(preference_from_json(nlohmann::json::parse(line), require_ranking));
        } catch (const nlohmann::json::exception& e) {
            throw Error("unreadable-preferences", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void save_preferences(const std::filesystem::path& path, const std::vector<PreferenceInstance>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + path.string());
    for (const auto& p : data) out << to_json(p).dump() << '\n';
}

PairedSample flatten_preferences(const std::vector<PreferenceInstance>& dataset, const CandidateScores& scores,
                                 FlattenMode mode) {
    if (scores.size() != dataset.size())
        throw Error("missing-score", "score table covers " + std::to_string(scores.size()) + " of " +
                                         std::to_string(dataset.size()) + " instances");
    PairedSample s;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& inst = dataset[i];
        const auto k = static_cast<int>(inst.candidates.size());
        if (inst.ranking.size() != inst.candidates.size())
            throw Error("invalid-preference", "instance '" + inst.image_id + "' is not ranked");
        validate_ranking(inst.ranking);
        for (int c = 0; c < k; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            if (uc >= scores[i].size() || !scores[i][uc])
                throw Error("missing-score", "instance '" + inst.image_id + "' candidate " + std::to_string(c));
            s.x.push_back(*scores[i][uc]);
            s.y.push_back(static_cast<double>(k + 1 - inst.ranking[uc]));
            if (mode == FlattenMode::PerInstance) s.groups.push_back(static_cast<std::int64_t>(i));
        }
    }
    return s;
}

}  // namespace reconkit::stats

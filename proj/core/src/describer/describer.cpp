#include "reconkit/describer/describer.hpp"


#include "reconkit/error.hpp"
#include "reconkit/parallel.hpp"

namespace reconkit::describer {

using nlohmann::json;

std::string_view task_prompt() {
    static constexpr std::string_view kPrompt =
        "You are a professional expert in remote sensing, specializing in image captioning. "
        "Given a remote sensing image, your goal is to generate an informative and highly accurate description.\n"
        "Guidelines:\n"
        "- Extract key objects and visual details as comprehensively as possible.\n"
        "- Describe the attributes of objects in detail, including quantity, color, material, shape, size, "
        "as well as absolute and relative spatial positions.\n"
        "- Strictly avoid hallucinated content, inaccuracies, and irrelevant information. "
        "Highlight essential visual elements without describing subjective feelings or atmosphere.\n"
        "- Adopt a macro-to-micro structure: first describe the overall scene, followed by specific objects.\n"
        "- Ensure the output is coherent, logically structured, and concise.";
    return kPrompt;
}

json CandidateSet::to_json() const {
    json cands = json::array();
    for (const auto& c : candidates)
        cands.push_back({{"index", c.index}, {"text", c.text}, {"temperature", c.temperature}, {"nonce", c.nonce},
                         {"backend", c.backend}});
    json fails = json::array();
    for (const auto& f : failed) fails.push_back({{"nonce", f.nonce}, {"error", f.error_code}, {"message", f.message}});
    return {{"image_id", image_id}, {"candidates", cands}, {"failed", fails}, {"temperature", temperature},
            {"requested", requested}};
}

CandidateSet sample_candidates(backends::ModelClients& clients, const ImageRecord& image, int n, double temperature,
                               std::size_t parallelism) {
    if (n < 1) throw Error("invalid-argument", "candidate count must be at least 1");
    if (temperature < 0.0) throw Error("invalid-argument", "temperature must be non-negative");

    std::vector<std::optional<backends::CaptionCandidate>> slots(static_cast<std::size_t>(n));
    std::vector<FailedSlot> failures(static_cast<std::size_t>(n));
    parallel_for(slots.size(), parallelism, [&](std::size_t i) {
        const std::int64_t nonce = static_cast<std::int64_t>(i) + 1;
        try {
            try {
                slots[i] = clients.generate_caption(image, task_prompt(), temperature, nonce);
            } catch (const Error& e) {
                if (e.code() != "empty-generation") throw;
                slots[i] = clients.generate_caption(image, task_prompt(), temperature, retry_nonce(nonce));
            }
        } catch (const Error& e) {
            failures[i] = {nonce, e.code(), e.detail()};
        }
    });

    CandidateSet set;
    set.image_id = image.id;
    set.temperature = temperature;
    set.requested = n;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            set.failed.push_back(failures[i]);
            continue;
        }
        slots[i]->index = static_cast<int>(set.candidates.size()) + 1;
        set.candidates.push_back(std::move(*slots[i]));
    }
    if (set.candidates.empty())
        throw Error("no-candidates", "all " + std::to_string(n) + " caption slots failed for " + image.id);
    return set;
}

Argmax argmax_first(std::span<const std::optional<double>> scores) {
    Argmax best;
    bool found = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i]) continue;
        const double v = *scores[i];
        if (!found || v > best.value) {
            best = {static_cast<int>(i) + 1, v, false};
            found = true;
        } else if (v == best.value) {
            best.tie_broken = true;
        }
    }
    if (!found) throw Error("no-candidates", "no candidate has a score");
    return best;
}

json SelectionResult::to_json() const {
    json s = json::array();
    json details = json::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        s.push_back(scores[i] ? json(*scores[i]) : json(nullptr));
        if (results[i])
            details.push_back(results[i]->to_json());
        else
            details.push_back({{"error", errors[i]}});
    }
    return {{"best_index", best_index}, {"best_caption", best_caption}, {"best_score", best_score},
            {"scores", s},          {"tie_broken", tie_broken},     {"results", details}};
}

SelectionResult select_best(recon::ReconScorer& scorer, const ImageRecord& image, const CandidateSet& set) {
    if (set.candidates.empty()) throw Error("no-candidates", "empty candidate set for " + set.image_id);
    std::vector<recon::ScoringPair> pairs;
    pairs.reserve(set.candidates.size());
    for (const auto& c : set.candidates) pairs.push_back({image, c.text});
    auto outcomes = scorer.score_batch(pairs);

    SelectionResult sel;
    for (auto& o : outcomes) {
        if (o.ok()) {
            sel.scores.emplace_back(o.result->score);
            sel.errors.emplace_back();
        } else {
            sel.scores.emplace_back();
            sel.errors.push_back(o.error_code + ": " + o.error_message);
        }
        sel.results.push_back(std::move(o.result));
    }
    return select_prefix(sel, set, set.candidates.size());
}

SelectionResult select_prefix(const SelectionResult& full, const CandidateSet& set, std::size_t k) {
    if (k == 0 || k > full.scores.size() || full.scores.size() != set.candidates.size())
        throw Error("invalid-argument", "prefix length " + std::to_string(k) + " outside the candidate set");
    SelectionResult sel;
    sel.scores.assign(full.scores.begin(), full.scores.begin() + static_cast<std::ptrdiff_t>(k));
    sel.results.assign(full.results.begin(), full.results.begin() + static_cast<std::ptrdiff_t>(k));
    sel.errors.assign(full.errors.begin(), full.errors.begin() + static_cast<std::ptrdiff_t>(k));
    const Argmax best = argmax_first(sel.scores);
    sel.best_index = best.index;
    sel.best_score = best.value;
    sel.tie_broken = best.tie_broken;
    sel.best_caption = set.candidates[static_cast<std::size_t>(best.index - 1)].text;
    return sel;
}

json DescribeResult::to_json() const {
    return {{"caption", caption}, {"selection", selection.to_json()}, {"candidates", candidates.to_json()}};
}

DescribeResult describe(recon::ReconScorer& scorer, const ImageRecord& image, const DescribeOptions& options) {
    DescribeResult out;
    out.candidates =
        sample_candidates(*scorer.context().clients, image, options.n, options.temperature, options.parallelism);
    out.selection = select_best(scorer, image, out.candidates);
    out.caption = out.selection.best_caption;
    return out;
}

}  // namespace reconkit::describer

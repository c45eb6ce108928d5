#include "reconkit/harness/metric_set.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "reconkit/error.hpp"
#include "reconkit/parallel.hpp"
#include "reconkit/text/metrics.hpp"

namespace reconkit::harness {
namespace {

ItemScores empty_scores(std::size_t n) {
    ItemScores s;
    s.values.resize(n);
    s.errors.resize(n);
    return s;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// Runs fn(instance) per item, turning errors into missing values.
template <typename Fn>
ItemScores per_instance(std::span<const MetricItem> items, Fn&& fn) {
    ItemScores out = empty_scores(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        try {
            if (items[i].references.empty()) throw Error("empty-references", "item has no references");
            const auto inst = text::make_instance(std::to_string(i), items[i].candidate, items[i].references);
            out.values[i] = fn(inst);
        } catch (const Error& e) {
            out.errors[i] = e.what();
        }
    }
    return out;
}

HarnessMetric bleu_metric(int n, bool smoothing) {
    HarnessMetric m;
    m.id = "bleu" + std::to_string(n);
    m.name = "BLEU-" + std::to_string(n);
    m.score = [n, smoothing](std::span<const MetricItem> items) {
        return per_instance(items, [n, smoothing](const text::EvalInstance& inst) {
            return text::bleu(std::span(&inst, 1), {n, text::BleuLevel::Sentence, smoothing}).value;
        });
    };
    m.corpus = [n](std::span<const MetricItem> items) {
        std::vector<text::EvalInstance> insts;
        for (std::size_t i = 0; i < items.size(); ++i)
            insts.push_back(text::make_instance(std::to_string(i), items[i].candidate, items[i].references));
        return text::bleu(insts, {n, text::BleuLevel::Corpus, false}).value;
    };
    return m;
}

HarnessMetric cider_metric() {
    HarnessMetric m;
    m.id = "cider-d";
    m.name = "CIDEr-D";
    m.score = [](std::span<const MetricItem> items) {
        // One IDF document per distinct reference set.
        std::map<std::vector<std::string>, std::vector<text::TokenSequence>> sets;
        for (const auto& item : items) {
            if (item.references.empty() || sets.count(item.references)) continue;
            std::vector<text::TokenSequence> refs;
            for (const auto& r : item.references) refs.push_back(text::tokenize(r));
            sets.emplace(item.references, std::move(refs));
        }
        std::vector<std::vector<text::TokenSequence>> corpus;
        for (auto& [_, refs] : sets) corpus.push_back(refs);
        ItemScores out = empty_scores(items.size());
        try {
            const text::CiderD cider(corpus);
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (items[i].references.empty()) {
                    out.errors[i] = "empty-references: item has no references";
                    continue;
                }
                out.values[i] = cider.score(text::tokenize(items[i].candidate), sets.at(items[i].references));
            }
        } catch (const Error& e) {
            std::fill(out.errors.begin(), out.errors.end(), e.what());
        }
        return out;
    };
    return m;
}

HarnessMetric clip_metric(const MetricContext& ctx) {
    HarnessMetric m;
    m.id = "clipscore";
    m.name = "CLIPScore";
    m.kind = MetricKind::ReferenceFree;
    auto clients = ctx.clients;
    const std::size_t parallelism = ctx.parallelism;
    if (!clients || !clients->backends().crossmodal) {
        m.available = false;
        m.note = "no cross-modal backend configured";
    } else {
        m.note = "captions truncated to the backend token limit (" +
                 std::to_string(clients->backends().crossmodal->token_limit()) + ")";
    }
    m.score = [clients, parallelism](std::span<const MetricItem> items) {
        ItemScores out = empty_scores(items.size());
        if (!clients || !clients->backends().crossmodal) {
            std::fill(out.errors.begin(), out.errors.end(), "unavailable");
            return out;
        }
        const auto& cm = *clients->backends().crossmodal;
        parallel_for(items.size(), parallelism, [&](std::size_t i) {
            try {
                const std::string text = cm.token_counter().truncate(items[i].candidate, cm.token_limit());
                out.values[i] = 100.0 * recon::clip_style_score(*clients, items[i].image, text);
            } catch (const Error& e) {
                out.errors[i] = e.what();
            }
        });
        return out;
    };
    return m;
}

HarnessMetric recon_metric(const MetricContext& ctx) {
    HarnessMetric m;
    m.id = "reconscore";
    m.name = "ReconScore";
    m.kind = MetricKind::ReferenceFree;
    auto scorer = ctx.scorer;
    if (!scorer) {
        m.available = false;
        m.note = "no scoring backends configured";
    }
    m.score = [scorer](std::span<const MetricItem> items) {
        ItemScores out = empty_scores(items.size());
        if (!scorer) {
            std::fill(out.errors.begin(), out.errors.end(), "unavailable");
            return out;
        }
        std::vector<recon::ScoringPair> pairs;
        pairs.reserve(items.size());
        for (const auto& item : items) pairs.push_back({item.image, item.candidate});
        auto outcomes = scorer->score_batch(pairs);
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (outcomes[i].ok())
                out.values[i] = 100.0 * outcomes[i].result->score;
            else
                out.errors[i] = outcomes[i].error_code + ": " + outcomes[i].error_message;
        }
        return out;
    };
    return m;
}

}  // namespace

std::string_view metric_kind_label(MetricKind kind) {
    return kind == MetricKind::ReferenceBased ? "reference-based" : "reference-free";
}

std::size_t ItemScores::failures() const {
    return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::nullopt));
}

std::string ItemScores::first_error() const {
    for (const auto& e : errors)
        if (!e.empty()) return e;
    return {};
}

std::optional<double> aggregate(const HarnessMetric& metric, std::span<const MetricItem> items,
                                const ItemScores& scores) {
    std::vector<MetricItem> present;
    double sum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!scores.values[i]) continue;
        sum += *scores.values[i];
        if (metric.corpus) present.push_back(items[i]);
    }
    const std::size_t n = items.size() - scores.failures();
    if (n == 0) return std::nullopt;
    if (metric.corpus) return metric.corpus(present);
    return sum / static_cast<double>(n);
}

std::vector<HarnessMetric> make_metrics(const std::vector<std::string>& names, const MetricContext& ctx) {
    std::vector<HarnessMetric> out;
    for (const auto& raw : names) {
        const std::string name = lower(raw);
        if (name == "bleu") {
            for (int n = 1; n <= 4; ++n) out.push_back(bleu_metric(n, ctx.smooth_sentence_bleu));
        } else if (name.size() == 5 && name.starts_with("bleu") && name[4] >= '1' && name[4] <= '4') {
            out.push_back(bleu_metric(name[4] - '0', ctx.smooth_sentence_bleu));
        } else if (name == "meteor") {
            HarnessMetric m;
            m.id = "meteor";
            m.name = "METEOR";
            m.note = "exact and stem stages only";
            m.score = [](std::span<const MetricItem> items) {
                return per_instance(items, [](const text::EvalInstance& inst) { return text::meteor(inst).value; });
            };
            out.push_back(std::move(m));
        } else if (name == "rouge" || name == "rouge-l" || name == "rougel") {
            HarnessMetric m;
            m.id = "rouge-l";
            m.name = "ROUGE-L";
            m.score = [](std::span<const MetricItem> items) {
                return per_instance(items, [](const text::EvalInstance& inst) { return text::rouge_l(inst).value; });
            };
            out.push_back(std::move(m));
        } else if (name == "cider" || name == "cider-d" || name == "ciderd") {
            out.push_back(cider_metric());
        } else if (name == "spice") {
            HarnessMetric m;
            m.id = "spice";
            m.name = "SPICE";
            m.available = false;
            m.note = "not computed (needs a scene-graph parser)";
            m.score = [](std::span<const MetricItem> items) {
                ItemScores s = empty_scores(items.size());
                std::fill(s.errors.begin(), s.errors.end(), "unavailable");
                return s;
            };
            out.push_back(std::move(m));
        } else if (name == "clipscore" || name == "clip") {
            out.push_back(clip_metric(ctx));
        } else if (name == "reconscore" || name == "recon") {
            out.push_back(recon_metric(ctx));
        } else {
            throw Error("unknown-metric", "unknown metric '" + raw + "'");
        }
    }
    std::stable_partition(out.begin(), out.end(),
                          [](const HarnessMetric& m) { return m.kind == MetricKind::ReferenceBased; });
    return out;
}

std::vector<std::string> default_metric_names() {
    return {"bleu", "meteor", "rouge-l", "cider-d", "spice", "clipscore", "reconscore"};
}

}  // namespace reconkit::harness

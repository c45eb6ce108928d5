#include "reconkit/harness/runners.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "reconkit/error.hpp"
#include "reconkit/stats/kendall.hpp"
#include "reconkit/text/tokenize.hpp"

namespace reconkit::harness {

using nlohmann::json;

namespace {

class ImageCache {
public:
    explicit ImageCache(const DatasetManifest& dataset) : dataset_(dataset) {}

    const ImageRecord& get(const DatasetEntry& entry) {
        auto it = images_.find(entry.image_id);
        if (it == images_.end()) it = images_.emplace(entry.image_id, dataset_.load_image(entry)).first;
        return it->second;
    }

private:
    const DatasetManifest& dataset_;
    std::map<std::string, ImageRecord> images_;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::string> metric_ids(const std::vector<HarnessMetric>& metrics) {
    std::vector<std::string> ids;
    for (const auto& m : metrics) ids.push_back(m.id);
    return ids;
}

std::string failure_note(const ItemScores& scores) {
    return std::to_string(scores.failures()) + " of " + std::to_string(scores.values.size()) +
           " items failed: " + scores.first_error();
}

/// One metric over several variant item lists.
struct VariantScores {
    std::vector<std::optional<double>> means;
    std::string note;
};

VariantScores score_variants(const HarnessMetric& metric, const std::vector<std::vector<MetricItem>>& variants,
                             json& instances, const std::vector<std::string>& ids,
                             const std::vector<std::string>& variant_names) {
    VariantScores out;
    if (!metric.available) {
        out.means.assign(variants.size(), std::nullopt);
        out.note = metric.note;
        return out;
    }
    for (std::size_t v = 0; v < variants.size(); ++v) {
        const ItemScores scores = metric.score(variants[v]);
        std::optional<double> mean;
        try {
            mean = aggregate(metric, variants[v], scores);
        } catch (const Error& e) {
            out.note = e.what();
        }
        out.means.push_back(mean);
        if (scores.failures() > 0 && out.note.empty()) out.note = failure_note(scores);
        for (std::size_t i = 0; i < ids.size(); ++i)
            instances[i]["scores"][variant_names[v]][metric.id] = optional_json(scores.values[i]);
    }
    if (out.note.empty()) out.note = metric.note;
    return out;
}

}  // namespace

double population_sigma(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n);
}

ExperimentReport run_preference_correlation(const std::vector<stats::PreferenceInstance>& prefs,
                                            const DatasetManifest& dataset, std::vector<HarnessMetric> metrics,
                                            stats::FlattenMode mode) {
    if (prefs.empty()) throw Error("invalid-argument", "preference dataset is empty");
    ImageCache images(dataset);
    std::vector<MetricItem> items;
    json instances = json::array();
    for (const auto& p : prefs) {
        stats::validate_ranking(p.ranking);
        if (p.ranking.size() != p.candidates.size())
            throw Error("not-a-permutation", "ranking size differs from candidate count for " + p.image_id);
        const DatasetEntry* entry = dataset.find(p.image_id);
        if (!entry) throw Error("unknown-image", "image " + p.image_id + " not in dataset " + dataset.name);
        json cands = json::array();
        for (std::size_t k = 0; k < p.candidates.size(); ++k) {
            items.push_back({images.get(*entry), p.candidates[k].text, entry->references});
            cands.push_back({{"model", p.candidates[k].model}, {"rank", p.ranking[k]}, {"scores", json::object()}});
        }
        instances.push_back({{"image_id", p.image_id}, {"candidates", cands}});
    }

    ExperimentReport report;
    report.experiment = "preference-correlation";
    report.columns = {"tau_b", "tau_c"};
    report.config = {{"dataset", dataset.name},
                     {"grouping", mode == stats::FlattenMode::Global ? "global" : "per-instance"},
                     {"metrics", metric_ids(metrics)},
                     {"instances", prefs.size()}};

    for (const auto& metric : metrics) {
        ReportRow row{std::string(metric_kind_label(metric.kind)), metric.name, {std::nullopt, std::nullopt},
                      metric.note};
        if (!metric.available) {
            report.rows.push_back(std::move(row));
            continue;
        }
        const ItemScores scores = metric.score(items);
        stats::CandidateScores grid;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < prefs.size(); ++i) {
            grid.emplace_back();
            for (std::size_t k = 0; k < prefs[i].candidates.size(); ++k, ++flat) {
                grid.back().push_back(scores.values[flat]);
                instances[i]["candidates"][k]["scores"][metric.id] = optional_json(scores.values[flat]);
            }
        }
        if (scores.failures() > 0) {
            row.note = failure_note(scores);
            report.rows.push_back(std::move(row));
            continue;
        }
        const auto sample = stats::flatten_preferences(prefs, grid, mode);
        try {
            row.values[0] = 100.0 * stats::kendall_tau_b(sample).tau;
        } catch (const Error& e) {
            row.note = e.what();
        }
        try {
            row.values[1] = 100.0 * stats::kendall_tau_c(sample).tau;
        } catch (const Error& e) {
            if (row.note.empty()) row.note = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    report.instances = std::move(instances);
    return report;
}

ExperimentReport run_perturbation_study(const DatasetManifest& dataset, std::vector<HarnessMetric> metrics,
                                        const PerturbationVariants& variants) {
    ImageCache images(dataset);
    std::vector<std::vector<MetricItem>> lists(2);
    std::vector<std::string> ids;
    std::size_t skipped = 0;
    json instances = json::array();
    for (const auto& e : dataset.entries) {
        auto para = e.variant(variants.paraphrased);
        auto pert = e.variant(variants.perturbed);
        if (!para || !pert) {
            ++skipped;
            continue;
        }
        lists[0].push_back({images.get(e), *para, e.references});
        lists[1].push_back({images.get(e), *pert, e.references});
        ids.push_back(e.image_id);
        instances.push_back({{"image_id", e.image_id}, {"scores", json::object()}});
    }
    if (ids.empty()) throw Error("invalid-argument", "no entry provides both caption variants");

    ExperimentReport report;
    report.experiment = "perturbation-study";
    report.columns = {"Paraphrased", "Perturbed", "Delta"};
    report.config = {{"dataset", dataset.name},
                     {"metrics", metric_ids(metrics)},
                     {"variants", {variants.paraphrased, variants.perturbed}}};
    for (const auto& metric : metrics) {
        auto vs = score_variants(metric, lists, instances, ids, {"paraphrased", "perturbed"});
        std::optional<double> delta;
        if (vs.means[0] && vs.means[1]) delta = *vs.means[0] - *vs.means[1];
        report.rows.push_back({std::string(metric_kind_label(metric.kind)), metric.name,
                               {vs.means[0], vs.means[1], delta}, vs.note});
    }
    report.instances = std::move(instances);
    report.extra = {{"evaluated", ids.size()}, {"skipped", skipped}};
    return report;
}

ExperimentReport run_length_robustness(const DatasetManifest& dataset, std::vector<HarnessMetric> metrics,
                                       const std::vector<std::string>& buckets) {
    if (buckets.empty()) throw Error("invalid-argument", "no length buckets given");
    ImageCache images(dataset);
    std::vector<std::vector<MetricItem>> lists(buckets.size());
    std::vector<std::string> ids;
    std::size_t skipped = 0;
    json instances = json::array();
    for (const auto& e : dataset.entries) {
        std::vector<std::string> texts;
        for (const auto& b : buckets)
            if (auto v = e.variant(b)) texts.push_back(*v);
        if (texts.size() != buckets.size()) {
            ++skipped;
            continue;
        }
        for (std::size_t b = 0; b < buckets.size(); ++b) lists[b].push_back({images.get(e), texts[b], e.references});
        ids.push_back(e.image_id);
        instances.push_back({{"image_id", e.image_id}, {"scores", json::object()}});
    }
    if (ids.empty()) throw Error("invalid-argument", "no entry provides every length variant");

    ExperimentReport report;
    report.experiment = "length-robustness";
    report.columns = buckets;
    report.columns.push_back("sigma");
    report.config = {{"dataset", dataset.name}, {"metrics", metric_ids(metrics)}, {"buckets", buckets}};

    json lengths = json::object();
    for (std::size_t b = 0; b < buckets.size(); ++b) {
        double words = 0.0;
        for (const auto& item : lists[b]) words += static_cast<double>(text::tokenize(item.candidate).tokens.size());
        lengths[buckets[b]] = words / static_cast<double>(lists[b].size());
    }

    for (const auto& metric : metrics) {
        auto vs = score_variants(metric, lists, instances, ids, buckets);
        std::vector<double> present;
        for (const auto& m : vs.means)
            if (m) present.push_back(*m);
        std::optional<double> sigma;
        if (present.size() == buckets.size()) sigma = population_sigma(present);
        auto values = vs.means;
        values.push_back(sigma);
        report.rows.push_back({std::string(metric_kind_label(metric.kind)), metric.name, values, vs.note});
    }
    report.instances = std::move(instances);
    report.extra = {{"evaluated", ids.size()}, {"skipped", skipped}, {"mean_tokens", lengths}};
    return report;
}

ExperimentReport run_candidate_ablation(const std::vector<DatasetManifest>& datasets, recon::ReconScorer& scorer,
                                        const AblationOptions& options) {
    if (datasets.empty()) throw Error("invalid-argument", "no datasets given");
    if (options.n_list.empty() || options.n_list.front() < 1 ||
        std::adjacent_find(options.n_list.begin(), options.n_list.end(), std::greater_equal<>()) !=
            options.n_list.end())
        throw Error("invalid-argument", "N list must be strictly ascending and start at 1 or more");
    const int max_n = options.n_list.back();
    auto& clients = *scorer.context().clients;

    ExperimentReport report;
    report.experiment = "candidate-ablation";
    report.row_header = "N";
    json dataset_names = json::array();
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        std::string name = datasets[d].name;
        if (std::find(report.columns.begin(), report.columns.end(), name) != report.columns.end())
            name += "#" + std::to_string(d + 1);
        report.columns.push_back(name);
        dataset_names.push_back(name);
    }
    report.columns.push_back("Total");
    report.config = {{"datasets", dataset_names},
                     {"n_list", options.n_list},
                     {"temperature", options.temperature},
                     {"params", scorer.context().params.to_json()}};

    // means[d][j]: mean selected score of dataset d at n_list[j].
    std::vector<std::vector<std::optional<double>>> means(datasets.size());
    json instances = json::array();
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        const auto& ds = datasets[d];
        std::vector<double> sums(options.n_list.size(), 0.0);
        std::vector<std::size_t> counts(options.n_list.size(), 0);
        for (const auto& entry : ds.entries) {
            const ImageRecord image = ds.load_image(entry);
            json row = {{"dataset", dataset_names[d]}, {"image_id", entry.image_id}};
            try {
                const auto set = describer::sample_candidates(clients, image, max_n, options.temperature,
                                                              options.parallelism);
                const auto full = describer::select_best(scorer, image, set);
                row["candidates"] = set.candidates.size();
                row["scores"] = json::array();
                for (const auto& s : full.scores) row["scores"].push_back(optional_json(s));
                json selected = json::object();
                for (std::size_t j = 0; j < options.n_list.size(); ++j) {
                    const std::size_t k =
                        std::min(static_cast<std::size_t>(options.n_list[j]), set.candidates.size());
                    try {
                        const auto sel = describer::select_prefix(full, set, k);
                        sums[j] += 100.0 * sel.best_score;
                        ++counts[j];
                        selected[std::to_string(options.n_list[j])] = 100.0 * sel.best_score;
                    } catch (const Error&) {
                        selected[std::to_string(options.n_list[j])] = nullptr;
                    }
                }
                row["selected"] = std::move(selected);
            } catch (const Error& e) {
                row["error"] = e.what();
            }
            instances.push_back(std::move(row));
        }
        for (std::size_t j = 0; j < options.n_list.size(); ++j)
            means[d].push_back(counts[j] ? std::optional<double>(sums[j] / static_cast<double>(counts[j]))
                                         : std::nullopt);
    }

    for (std::size_t j = 0; j < options.n_list.size(); ++j) {
        ReportRow row{"", "N=" + std::to_string(options.n_list[j]), {}, ""};
        std::optional<double> total = 0.0;
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            row.values.push_back(means[d][j]);
            if (means[d][j] && total)
                *total += *means[d][j];
            else
                total.reset();
        }
        row.values.push_back(total);
        report.rows.push_back(std::move(row));
    }
    report.instances = std::move(instances);
    return report;
}

ExperimentReport run_encoder_ablation(const DatasetManifest& dataset,
                                      const std::vector<std::shared_ptr<backends::ImageEmbedder>>& embedders,
                                      const std::vector<std::string>& sources, const recon::EvaluationContext& base) {
    if (embedders.size() < 2) throw Error("invalid-argument", "encoder ablation needs at least two image embedders");
    if (sources.empty()) throw Error("invalid-argument", "no caption sources given");
    if (!base.clients) throw Error("invalid-argument", "evaluation context has no model clients");

    ImageCache images(dataset);
    std::vector<std::vector<recon::ScoringPair>> pairs(sources.size());
    std::vector<std::vector<std::string>> ids(sources.size());
    for (const auto& e : dataset.entries)
        for (std::size_t s = 0; s < sources.size(); ++s)
            if (auto text = e.variant(sources[s])) {
                pairs[s].push_back({images.get(e), *text});
                ids[s].push_back(e.image_id);
            }

    ExperimentReport report;
    report.experiment = "encoder-ablation";
    report.row_header = "Embedder";
    report.columns = sources;
    json embedder_ids = json::array();
    for (const auto& e : embedders) embedder_ids.push_back(e->descriptor().identity());
    report.config = {{"dataset", dataset.name},
                     {"embedders", embedder_ids},
                     {"sources", sources},
                     {"params", base.params.to_json()}};

    std::vector<std::vector<std::optional<double>>> means;
    json instances = json::array();
    for (const auto& embedder : embedders) {
        recon::EvaluationContext ctx = base;
        ctx.clients = std::make_shared<backends::ModelClients>(base.clients->with_image_embedder(embedder));
        recon::ReconScorer scorer(ctx);
        const std::string identity = embedder->descriptor().identity();
        std::vector<std::optional<double>> row_means;
        std::string note;
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const auto outcomes = scorer.score_batch(pairs[s]);
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                json cell = {{"embedder", identity}, {"source", sources[s]}, {"image_id", ids[s][i]}};
                if (outcomes[i].ok()) {
                    sum += 100.0 * outcomes[i].result->score;
                    ++count;
                    cell["score"] = 100.0 * outcomes[i].result->score;
                } else {
                    cell["error"] = outcomes[i].error_code;
                    if (note.empty()) note = outcomes[i].error_code + ": " + outcomes[i].error_message;
                }
                instances.push_back(std::move(cell));
            }
            row_means.push_back(count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt);
        }
        report.rows.push_back({"mean ReconScore", identity, row_means, note});
        means.push_back(std::move(row_means));
    }

    json rankings = json::object();
    for (std::size_t e = 0; e < embedders.size(); ++e) {
        std::vector<std::size_t> order(sources.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return means[e][a].value_or(-1.0) > means[e][b].value_or(-1.0);
        });
        ReportRow row{"rank", report.rows[e].label, std::vector<std::optional<double>>(sources.size()), "", 0};
        json ordered = json::array();
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            row.values[order[pos]] = static_cast<double>(pos + 1);
            ordered.push_back(sources[order[pos]]);
        }
        rankings[report.rows[e].label] = ordered;
        report.rows.push_back(std::move(row));
    }

    json consistency = json::array();
    bool consistent = true;
    for (std::size_t a = 0; a < embedders.size(); ++a)
        for (std::size_t b = a + 1; b < embedders.size(); ++b) {
            json item = {{"a", embedder_ids[a]}, {"b", embedder_ids[b]}};
            stats::PairedSample sample;
            for (std::size_t s = 0; s < sources.size(); ++s)
                if (means[a][s] && means[b][s]) {
                    sample.x.push_back(*means[a][s]);
                    sample.y.push_back(*means[b][s]);
                }
            try {
                const double tau = stats::kendall_tau_b(sample).tau;
                item["tau_b"] = tau;
                item["agree"] = tau == 1.0;
                consistent = consistent && tau == 1.0;
            } catch (const Error& e) {
                item["tau_b"] = nullptr;
                item["agree"] = false;
                item["note"] = e.what();
                consistent = false;
            }
            consistency.push_back(std::move(item));
        }
    report.instances = std::move(instances);
    report.extra = {{"rankings", rankings}, {"consistency", consistency}, {"consistent", consistent}};
    return report;
}

}  // namespace reconkit::harness

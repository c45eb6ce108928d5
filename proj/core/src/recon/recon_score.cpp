#include "reconkit/recon/recon_score.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "reconkit/backends/ledger.hpp"
#include "reconkit/error.hpp"
#include "reconkit/parallel.hpp"
#include "reconkit/recon/prompt.hpp"

namespace reconkit::recon {

using nlohmann::json;

double normalized_score(double cosine) {
    if (!(cosine >= -1.0 - kCosineTolerance && cosine <= 1.0 + kCosineTolerance))
        throw Error("embedding-not-normalized", "cosine " + std::to_string(cosine) + " outside [-1, 1]");
    return (std::clamp(cosine, -1.0, 1.0) + 1.0) / 2.0;
}

namespace {

std::string file_safe(std::string_view id) {
    std::string out(id);
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
    return out;
}

}  // namespace

ReconScorer::ReconScorer(EvaluationContext ctx) : ctx_(std::move(ctx)) {
    if (!ctx_.clients) throw Error("invalid-argument", "evaluation context has no model clients");
    const auto& b = ctx_.clients->backends();
    if (!b.t2i || !b.image_embedder)
        throw Error("invalid-argument", "scoring needs a text-to-image backend and an image embedder");
    ctx_.params.validate();
    if (ctx_.dump_dir) std::filesystem::create_directories(*ctx_.dump_dir);
}

ReconScorer::Prepared ReconScorer::prepare(const ImageRecord& image, std::string_view caption) const {
    Prepared p;
    p.fitted_caption = fit_caption(caption, static_cast<std::size_t>(ctx_.params.max_prompt_tokens));
    const auto& b = ctx_.clients->backends();
    p.key = CacheKey::compute(p.fitted_caption, b.t2i->descriptor(), b.image_embedder->descriptor(), ctx_.params,
                              kPromptTemplateVersion)
                .with_image(image.checksum);
    return p;
}

ReconScoreResult ReconScorer::compute(const ImageRecord& image, const Prepared& prepared) {
    auto& clients = *ctx_.clients;
    const auto& b = clients.backends();
    const std::string wrapped =
        wrap_perspective_prompt(prepared.fitted_caption, static_cast<std::size_t>(ctx_.params.max_prompt_tokens));
    const ImageSize size = reconstruction_size(image.size, ctx_.params.max_dim_px);
    ImageRecord recon = clients.generate_image(wrapped, ctx_.params, size);

    if (ctx_.cache) {
        const std::string request = backends::image_request_key(b.t2i->descriptor(), wrapped, ctx_.params, size);
        const std::string kept = ctx_.cache->observe_t2i(request, recon.checksum);
        if (kept != recon.checksum) {
            clients.ledger()->record({"t2i", b.t2i->descriptor().identity(), request, "drift", 0.0,
                                      json{{"observed", recon.checksum}, {"kept", kept}}});
            if (auto bytes = clients.blobs()->get(kept))
                recon = image_from_bytes("recon-" + kept.substr(0, 16), std::move(*bytes));
        }
    }

    const auto original_embedding = clients.embed_image(image);
    const auto recon_embedding = clients.embed_image(recon);
    const double cos = cosine(original_embedding, recon_embedding);

    ReconScoreResult r;
    r.score = normalized_score(cos);
    r.cosine = std::clamp(cos, -1.0, 1.0);
    r.wrapped_prompt = wrapped;
    r.image_checksum = image.checksum;
    r.reconstructed_image = recon.checksum;
    r.reconstructed_size = recon.size;
    r.params = ctx_.params;
    r.t2i_backend = b.t2i->descriptor().identity();
    r.embedder_backend = b.image_embedder->descriptor().identity();
    r.cache_key = prepared.key;

    if (ctx_.dump_dir) {
        const auto path = *ctx_.dump_dir / (file_safe(image.id) + "__" + prepared.key.substr(0, 12) + "." + recon.format);
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(recon.bytes->data()), static_cast<std::streamsize>(recon.bytes->size()));
    }
    return r;
}

void ReconScorer::record_lookup(const std::string& key, bool hit, const ReconScoreResult* result) const {
    const auto& b = ctx_.clients->backends();
    json response = json::object();
    if (result) response = {{"score", result->score}, {"cosine", result->cosine}};
    ctx_.clients->ledger()->record({"recon",
                                    b.t2i->descriptor().identity() + "+" + b.image_embedder->descriptor().identity(),
                                    key, hit ? "hit" : "miss", 0.0, std::move(response)});
}

ReconScoreResult ReconScorer::score(const ImageRecord& image, std::string_view caption) {
    const Prepared prepared = prepare(image, caption);
    if (ctx_.cache) {
        if (auto found = ctx_.cache->find(prepared.key)) {
            found->cache_hit = true;
            record_lookup(prepared.key, true, &*found);
            return *found;
        }
    }
    ReconScoreResult r = compute(image, prepared);
    if (ctx_.cache && !ctx_.cache->insert(prepared.key, r)) {
        // Another writer got there first; its result is canonical.
        r = *ctx_.cache->find(prepared.key);
        r.cache_hit = true;
        record_lookup(prepared.key, true, &r);
        return r;
    }
    record_lookup(prepared.key, false, &r);
    return r;
}

std::vector<ScoreOutcome> ReconScorer::score_batch(std::span<const ScoringPair> pairs) {
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    const std::size_t n = pairs.size();
    std::vector<ScoreOutcome> out(n);
    std::vector<std::optional<Prepared>> prepared(n);
    std::vector<std::size_t> owner(n, npos);
    std::vector<std::size_t> slot(n, npos);
    std::vector<bool> from_cache(n, false);
    std::vector<std::size_t> pending;
    std::map<std::string, std::size_t> first;

    for (std::size_t i = 0; i < n; ++i) {
        try {
            prepared[i] = prepare(pairs[i].image, pairs[i].caption);
        } catch (const Error& e) {
            out[i].error_code = e.code();
            out[i].error_message = e.detail();
            continue;
        }
        auto [it, inserted] = first.try_emplace(prepared[i]->key, i);
        owner[i] = it->second;
        if (!inserted) continue;
        if (ctx_.cache) {
            if (auto found = ctx_.cache->find(prepared[i]->key)) {
                found->cache_hit = true;
                out[i].result = std::move(found);
                from_cache[i] = true;
                continue;
            }
        }
        slot[i] = pending.size();
        pending.push_back(i);
    }

    std::vector<std::optional<ReconScoreResult>> computed(pending.size());
    std::vector<std::pair<std::string, std::string>> failures(pending.size());
    parallel_for(pending.size(), ctx_.parallelism, [&](std::size_t k) {
        const std::size_t i = pending[k];
        try {
            computed[k] = compute(pairs[i].image, *prepared[i]);
        } catch (const Error& e) {
            failures[k] = {e.code(), e.detail()};
        } catch (const std::exception& e) {
            failures[k] = {"internal", e.what()};
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (owner[i] == npos) continue;
        const std::string& key = prepared[i]->key;
        if (owner[i] != i) {
            const ScoreOutcome& src = out[owner[i]];
            out[i] = src;
            if (out[i].result) {
                out[i].result->cache_hit = true;
                record_lookup(key, true, &*out[i].result);
            }
            continue;
        }
        if (from_cache[i]) {
            record_lookup(key, true, &*out[i].result);
            continue;
        }
        const std::size_t k = slot[i];
        if (!computed[k]) {
            out[i].error_code = failures[k].first;
            out[i].error_message = failures[k].second;
            continue;
        }
        ReconScoreResult r = std::move(*computed[k]);
        if (ctx_.cache && !ctx_.cache->insert(key, r)) {
            r = *ctx_.cache->find(key);
            r.cache_hit = true;
            record_lookup(key, true, &r);
        } else {
            record_lookup(key, false, &r);
        }
        out[i].result = std::move(r);
    }
    return out;
}

double clip_style_score(backends::ModelClients& clients, const ImageRecord& image, std::string_view caption) {
    const auto text = clients.embed_crossmodal_text(caption);
    const auto img = clients.embed_crossmodal_image(image);
    return 2.5 * std::max(cosine(img, text), 0.0);
}

}  // namespace reconkit::recon

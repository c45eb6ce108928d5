#include "reconkit/recon/cache.hpp"

#include <fstream>
#include <vector>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

namespace reconkit::recon {

using nlohmann::json;

json ReconScoreResult::to_json() const {
    return {{"score", score},
            {"cosine", cosine},
            {"wrapped_prompt", wrapped_prompt},
            {"image_checksum", image_checksum},
            {"reconstructed_image", reconstructed_image},
            {"reconstructed_size", {reconstructed_size.width, reconstructed_size.height}},
            {"params", params.to_json()},
            {"t2i_backend", t2i_backend},
            {"embedder_backend", embedder_backend},
            {"cache_key", cache_key},
            {"cache_hit", cache_hit}};
}

ReconScoreResult ReconScoreResult::from_json(const json& j) {
    ReconScoreResult r;
    r.score = j.at("score").get<double>();
    r.cosine = j.at("cosine").get<double>();
    r.wrapped_prompt = j.at("wrapped_prompt").get<std::string>();
    r.image_checksum = j.at("image_checksum").get<std::string>();
    r.reconstructed_image = j.at("reconstructed_image").get<std::string>();
    r.reconstructed_size = {j.at("reconstructed_size").at(0).get<int>(), j.at("reconstructed_size").at(1).get<int>()};
    r.params = backends::GenerationParams::from_json(j.at("params"));
    r.t2i_backend = j.at("t2i_backend").get<std::string>();
    r.embedder_backend = j.at("embedder_backend").get<std::string>();
    r.cache_key = j.at("cache_key").get<std::string>();
    r.cache_hit = j.value("cache_hit", false);
    return r;
}

CacheKey CacheKey::compute(std::string_view fitted_caption, const backends::BackendDescriptor& t2i,
                           const backends::BackendDescriptor& embedder, const backends::GenerationParams& params,
                           std::string_view template_version) {
    const json doc = {{"caption", fitted_caption},
                      {"t2i", t2i.identity_json()},
                      {"embedder", embedder.identity_json()},
                      {"params", params.to_json()},
                      {"template", template_version}};
    return {sha256_hex(doc.dump())};
}

std::string CacheKey::with_image(const std::string& image_checksum) const {
    return sha256_hex(digest + "|" + image_checksum);
}

ReconCache::ReconCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
    auto read = [](const std::filesystem::path& file, auto&& each) {
        std::ifstream in(file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                each(json::parse(line));
            } catch (const json::exception& e) {
                throw Error("corrupt-cache", file.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    };
    read(*dir_ / "records.jsonl", [&](const json& j) {
        records_.try_emplace(j.at("key").get<std::string>(), ReconScoreResult::from_json(j.at("result")));
    });
    read(*dir_ / "t2i.jsonl", [&](const json& j) {
        t2i_.try_emplace(j.at("key").get<std::string>(), j.at("checksum").get<std::string>());
    });
}

std::optional<ReconScoreResult> ReconCache::find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    std::optional<ReconScoreResult> out;
    if (auto it = records_.find(key); it != records_.end()) out = it->second;
    return out;
}

bool ReconCache::insert(const std::string& key, const ReconScoreResult& result) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = records_.try_emplace(key, result);
    if (!inserted) return false;
    it->second.cache_hit = false;
    if (dir_) append(*dir_ / "records.jsonl", {{"key", key}, {"result", it->second.to_json()}});
    return true;
}

std::optional<std::string> ReconCache::t2i_observation(const std::string& request_key) const {
    std::lock_guard lock(mutex_);
    std::optional<std::string> out;
    if (auto it = t2i_.find(request_key); it != t2i_.end()) out = it->second;
    return out;
}

std::string ReconCache::observe_t2i(const std::string& request_key, const std::string& checksum) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = t2i_.try_emplace(request_key, checksum);
    if (inserted && dir_) append(*dir_ / "t2i.jsonl", {{"key", request_key}, {"checksum", checksum}});
    return it->second;
}

std::size_t ReconCache::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

void ReconCache::compact() {
    std::lock_guard lock(mutex_);
    if (!dir_) return;
    auto rewrite = [&](const std::filesystem::path& file, auto&& lines) {
        const auto tmp = std::filesystem::path(file).concat(".tmp");
        {
            std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
            for (const auto& line : lines) out << line.dump() << '\n';
            if (!out) throw Error("cache-write", "write failed for " + tmp.string());
        }
        std::filesystem::rename(tmp, file);
    };
    std::vector<json> records;
    for (const auto& [key, result] : records_) records.push_back({{"key", key}, {"result", result.to_json()}});
    rewrite(*dir_ / "records.jsonl", records);
    std::vector<json> t2i;
    for (const auto& [key, checksum] : t2i_) t2i.push_back({{"key", key}, {"checksum", checksum}});
    rewrite(*dir_ / "t2i.jsonl", t2i);
}

void ReconCache::append(const std::filesystem::path& file, const json& line) {
    std::ofstream out(file, std::ios::app | std::ios::binary);
    if (!out) throw Error("cache-write", "cannot append to " + file.string());
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw Error("cache-write", "write failed for " + file.string());
}

}  // namespace reconkit::recon

#include "reconkit/backends/ledger.hpp"

#include <algorithm>
#include <fstream>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

namespace reconkit::backends {

nlohmann::json to_json(const LedgerEntry& e) {
    return {{"role", e.role},       {"backend", e.backend},         {"key", e.key},
            {"status", e.status},   {"duration_ms", e.duration_ms}, {"response", e.response}};
}

LedgerEntry ledger_entry_from_json(const nlohmann::json& j) {
    LedgerEntry e;
    e.role = j.at("role").get<std::string>();
    e.backend = j.value("backend", std::string{});
    e.key = j.at("key").get<std::string>();
    e.status = j.at("status").get<std::string>();
    e.duration_ms = j.value("duration_ms", 0.0);
    e.response = j.value("response", nlohmann::json());
    return e;
}

void CallLedger::record(LedgerEntry entry) {
    std::lock_guard lock(mutex_);
    if (entry.status == "miss" && !entry.response.is_null())
        responses_.emplace(std::make_pair(entry.role, entry.key), entry.response);
    entries_.push_back(std::move(entry));
}

std::vector<LedgerEntry> CallLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::vector<LedgerEntry> CallLedger::canonical_entries() const {
    std::vector<LedgerEntry> out = entries();
    std::vector<std::pair<std::string, std::size_t>> order;
    order.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) order.emplace_back(to_json(out[i]).dump(), i);
    std::sort(order.begin(), order.end());
    std::vector<LedgerEntry> sorted;
    sorted.reserve(out.size());
    for (const auto& [text, i] : order) sorted.push_back(out[i]);
    return sorted;
}

std::size_t CallLedger::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void CallLedger::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + path.string());
    for (const auto& e : canonical_entries()) out << to_json(e).dump() << '\n';
}

std::shared_ptr<CallLedger> CallLedger::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("unreadable-ledger", "cannot open " + path.string());
    auto ledger = std::make_shared<CallLedger>();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            ledger->record(ledger_entry_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error("unreadable-ledger", e.what());
        }
    }
    return ledger;
}

std::optional<nlohmann::json> CallLedger::find_response(std::string_view role, const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = responses_.find(std::make_pair(std::string(role), key));
    std::optional<nlohmann::json> out;
    if (it != responses_.end()) out.emplace(it->second);
    return out;
}

namespace {

std::string digest_of(nlohmann::json j) { return sha256_hex(j.dump()); }

}  // namespace

std::string caption_request_key(const BackendDescriptor& backend, const std::string& image_checksum,
                                std::string_view system_prompt, double temperature, std::int64_t nonce) {
    return digest_of({{"op", "caption"},
                      {"backend", backend.identity_json()},
                      {"image", image_checksum},
                      {"prompt", std::string(system_prompt)},
                      {"temperature", temperature},
                      {"nonce", nonce}});
}

std::string completion_request_key(const BackendDescriptor& backend, std::string_view prompt, double temperature,
                                   std::int64_t nonce) {
    return digest_of({{"op", "complete"},
                      {"backend", backend.identity_json()},
                      {"prompt", std::string(prompt)},
                      {"temperature", temperature},
                      {"nonce", nonce}});
}

std::string image_request_key(const BackendDescriptor& backend, std::string_view prompt,
                              const GenerationParams& params, ImageSize size) {
    return digest_of({{"op", "generate"},
                      {"backend", backend.identity_json()},
                      {"prompt", std::string(prompt)},
                      {"params", params.to_json()},
                      {"width", size.width},
                      {"height", size.height}});
}

std::string embed_image_request_key(const BackendDescriptor& backend, const std::string& image_checksum) {
    return digest_of({{"op", "embed-image"}, {"backend", backend.identity_json()}, {"image", image_checksum}});
}

std::string embed_text_request_key(const BackendDescriptor& backend, std::string_view text) {
    return digest_of({{"op", "embed-text"}, {"backend", backend.identity_json()}, {"text", std::string(text)}});
}

}  // namespace reconkit::backends

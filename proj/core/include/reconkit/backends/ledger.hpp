#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reconkit/backends/types.hpp"
#include "reconkit/image.hpp"

namespace reconkit::backends {

/// One ledgered call or cache event. status is "miss" (backend called),
/// "hit" (served from cache), "drift" (backend disagreed with its first
/// observation) or "error".
struct LedgerEntry {
    std::string role;
    std::string backend;
    std::string key;
    std::string status;
    double duration_ms = 0.0;
    nlohmann::json response;
};

nlohmann::json to_json(const LedgerEntry& e);
LedgerEntry ledger_entry_from_json(const nlohmann::json& j);

/// Thread-safe append-only record of backend calls. Entries are kept in
/// arrival order in memory and written in a canonical order, so concurrent
/// runs over the same work produce the same file.
class CallLedger {
public:
    void record(LedgerEntry entry);
    std::vector<LedgerEntry> entries() const;
    std::vector<LedgerEntry> canonical_entries() const;
    std::size_t size() const;

    void save(const std::filesystem::path& path) const;
    static std::shared_ptr<CallLedger> load(const std::filesystem::path& path);

    /// Response recorded for a backend call ("miss" entry).
    std::optional<nlohmann::json> find_response(std::string_view role, const std::string& key) const;

private:
    mutable std::mutex mutex_;
    std::vector<LedgerEntry> entries_;
    std::map<std::pair<std::string, std::string>, nlohmann::json> responses_;
};

// Request digests. Each is the SHA-256 of a canonical JSON description of the
// request, so the same request always maps to the same key.
std::string caption_request_key(const BackendDescriptor& backend, const std::string& image_checksum,
                                std::string_view system_prompt, double temperature, std::int64_t nonce);
std::string completion_request_key(const BackendDescriptor& backend, std::string_view prompt, double temperature,
                                   std::int64_t nonce);
std::string image_request_key(const BackendDescriptor& backend, std::string_view prompt,
                              const GenerationParams& params, ImageSize size);
std::string embed_image_request_key(const BackendDescriptor& backend, const std::string& image_checksum);
std::string embed_text_request_key(const BackendDescriptor& backend, std::string_view text);

}  // namespace reconkit::backends

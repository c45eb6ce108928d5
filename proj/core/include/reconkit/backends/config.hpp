#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reconkit/backends/clients.hpp"
#include "reconkit/backends/replay.hpp"

namespace reconkit::backends {

/// One entry of the backend config file.
struct BackendSpec {
    BackendDescriptor descriptor;
    std::string kind = "mock";  // "mock" or "http"
    std::string api_key_env;
    std::size_t token_limit = 77;     // cross-modal only
    nlohmann::json options = nlohmann::json::object();  // mock options
};

/// Backend config file:
///   {"backends": [{"role", "kind", "endpoint", "model_id", "version_tag",
///                  "api_key_env"?, "token_limit"?, "options"?}, ...]}
/// A role may appear more than once for image-embed (encoder ablations); the
/// first entry of each role is the default.
struct BackendConfig {
    std::vector<BackendSpec> specs;

    static BackendConfig mock();
    static BackendConfig from_json(const nlohmann::json& j);
    static BackendConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    const BackendSpec& primary(Role role) const;
    std::vector<BackendSpec> all(Role role) const;
};

/// Instantiates the backends named by the config. With a replay source every
/// backend answers from the recorded ledger instead.
BackendSet build_backends(const BackendConfig& config, const std::optional<ReplaySource>& replay = std::nullopt);
std::shared_ptr<ImageEmbedder> build_image_embedder(const BackendSpec& spec,
                                                    const std::optional<ReplaySource>& replay = std::nullopt);

}  // namespace reconkit::backends

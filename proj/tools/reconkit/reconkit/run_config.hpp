#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "reconkit/backends/config.hpp"
#include "reconkit/backends/types.hpp"

namespace reconkit::cli {

/// Fully materialized settings of one run. Built-in defaults are overridden
/// by a config file, which is overridden by flags. The output directory is not
/// part of the snapshot.
struct RunConfig {
    backends::BackendConfig backends = backends::BackendConfig::mock();
    backends::GenerationParams params;
    int n = 10;
    double temperature = 0.8;
    std::size_t parallelism = 4;
    /// Experiment-specific settings (name, datasets, metrics, ...).
    nlohmann::json experiment = nlohmann::json::object();

    /// Overlays the fields present in j. "backends" is "mock", a path to a
    /// backend config file (relative to base_dir) or an inline config.
    void apply(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    void set_backends(const std::string& spec, const std::filesystem::path& base_dir = {});

    nlohmann::json to_json() const;
    static RunConfig load(const std::filesystem::path& path);
};

}  // namespace reconkit::cli

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reconkit/image.hpp"

namespace reconkit::harness {

/// One image with its ground-truth references. `variants` holds prepared
/// caption variants by name ("paraphrased", "perturbed", "S", "M", "L", or a
/// caption-source name).
struct DatasetEntry {
    std::string image_id;
    std::filesystem::path image;  // resolved against the manifest root
    std::vector<std::string> references;
    std::vector<std::string> tags;
    std::map<std::string, std::string> variants;

    std::optional<std::string> variant(const std::string& name) const;
};

/// Manifest file:
///   {"name", "root"?, "entries": [{"image_id", "image", "references"?, "tags"?, "variants"?}]}
/// A relative root is taken relative to the manifest's directory, and relative
/// image paths relative to the root.
struct DatasetManifest {
    std::string name;
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;

    const DatasetEntry* find(const std::string& image_id) const;
    ImageRecord load_image(const DatasetEntry& entry) const;
    /// Paths are written relative to root where possible.
    nlohmann::json to_json() const;
};

/// Validates ids and decodes every image. Throws "unreadable-manifest",
/// "duplicate-id" (naming the id) or "missing-image" (listing every absent file).
DatasetManifest load_dataset(const std::filesystem::path& manifest_path);
DatasetManifest dataset_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
void save_dataset(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace reconkit::harness

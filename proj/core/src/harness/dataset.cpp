#include "reconkit/harness/dataset.hpp"

#include <fstream>
#include <set>

#include "reconkit/error.hpp"

namespace reconkit::harness {

using nlohmann::json;

std::optional<std::string> DatasetEntry::variant(const std::string& name) const {
    std::optional<std::string> out;
    if (auto it = variants.find(name); it != variants.end()) out = it->second;
    return out;
}

const DatasetEntry* DatasetManifest::find(const std::string& image_id) const {
    for (const auto& e : entries)
        if (e.image_id == image_id) return &e;
    return nullptr;
}

ImageRecord DatasetManifest::load_image(const DatasetEntry& entry) const {
    return reconkit::load_image(entry.image, entry.image_id);
}

json DatasetManifest::to_json() const {
    json list = json::array();
    for (const auto& e : entries) {
        auto rel = e.image.lexically_proximate(root);
        json item = {{"image_id", e.image_id},
                     {"image", rel.generic_string()},
                     {"references", e.references},
                     {"tags", e.tags}};
        if (!e.variants.empty()) item["variants"] = e.variants;
        list.push_back(std::move(item));
    }
    return {{"name", name}, {"root", root.generic_string()}, {"entries", list}};
}

DatasetManifest dataset_from_json(const json& j, const std::filesystem::path& base_dir) {
    DatasetManifest m;
    std::vector<std::string> missing;
    try {
        m.name = j.value("name", std::string("dataset"));
        std::filesystem::path root = j.value("root", std::string("."));
        m.root = root.is_absolute() ? root : (base_dir / root).lexically_normal();
        std::set<std::string> seen;
        for (const auto& item : j.at("entries")) {
            DatasetEntry e;
            e.image_id = item.at("image_id").get<std::string>();
            if (!seen.insert(e.image_id).second) throw Error("duplicate-id", "duplicate image_id " + e.image_id);
            std::filesystem::path image = item.at("image").get<std::string>();
            e.image = image.is_absolute() ? image : (m.root / image).lexically_normal();
            e.references = item.value("references", std::vector<std::string>{});
            e.tags = item.value("tags", std::vector<std::string>{});
            e.variants = item.value("variants", std::map<std::string, std::string>{});
            if (!std::filesystem::exists(e.image)) missing.push_back(e.image.string());
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error("unreadable-manifest", e.what());
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& p : missing) list += (list.empty() ? "" : ", ") + p;
        throw Error("missing-image", std::to_string(missing.size()) + " missing: " + list);
    }
    return m;
}

DatasetManifest load_dataset(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("unreadable-manifest", "cannot open " + manifest_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("unreadable-manifest", manifest_path.string() + ": " + e.what());
    }
    auto m = dataset_from_json(j, manifest_path.parent_path());
    for (const auto& e : m.entries) (void)m.load_image(e);
    return m;
}

void save_dataset(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + path.string());
    out << manifest.to_json().dump(2) << '\n';
}

}  // namespace reconkit::harness

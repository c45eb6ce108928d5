#include "reconkit/run_config.hpp"

#include <fstream>

#include "reconkit/error.hpp"

namespace reconkit::cli {

using nlohmann::json;

void RunConfig::set_backends(const std::string& spec, const std::filesystem::path& base_dir) {
    if (spec == "mock") {
        backends = backends::BackendConfig::mock();
        return;
    }
    std::filesystem::path path = spec;
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    backends = backends::BackendConfig::load(path);
}

void RunConfig::apply(const json& j, const std::filesystem::path& base_dir) {
    try {
        if (j.contains("backends")) {
            const auto& b = j.at("backends");
            if (b.is_string())
                set_backends(b.get<std::string>(), base_dir);
            else
                backends = backends::BackendConfig::from_json(b);
        }
        if (j.contains("params")) {
            json merged = params.to_json();
            merged.update(j.at("params"));
            params = backends::GenerationParams::from_json(merged);
        }
        n = j.value("n", n);
        temperature = j.value("temperature", temperature);
        parallelism = j.value("parallelism", parallelism);
        if (j.contains("experiment")) experiment.update(j.at("experiment"));
    } catch (const json::exception& e) {
        throw Error("invalid-config", e.what());
    }
    if (n < 1) throw Error("invalid-config", "n must be at least 1");
    if (temperature < 0.0) throw Error("invalid-config", "temperature must be non-negative");
    if (parallelism < 1) throw Error("invalid-config", "parallelism must be at least 1");
}

json RunConfig::to_json() const {
    return {{"backends", backends.to_json()},
            {"params", params.to_json()},
            {"n", n},
            {"temperature", temperature},
            {"parallelism", parallelism},
            {"experiment", experiment}};
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("invalid-config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("invalid-config", path.string() + ": " + e.what());
    }
    RunConfig c;
    c.apply(j, path.parent_path());
    return c;
}

}  // namespace reconkit::cli

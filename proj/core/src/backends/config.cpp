#include "reconkit/backends/config.hpp"

#include <fstream>

#include "reconkit/backends/http.hpp"
#include "reconkit/backends/mock.hpp"
#include "reconkit/error.hpp"

namespace reconkit::backends {

namespace {

BackendSpec spec_from_json(const nlohmann::json& j) {
    BackendSpec s;
    s.descriptor.role = parse_role(j.at("role").get<std::string>());
    s.kind = j.value("kind", std::string("http"));
    if (s.kind != "http" && s.kind != "mock") throw Error("invalid-config", "unknown backend kind '" + s.kind + "'");
    const auto defaults = mock_descriptor(s.descriptor.role);
    s.descriptor.endpoint = j.value("endpoint", s.kind == "mock" ? defaults.endpoint : std::string{});
    s.descriptor.model_id = j.value("model_id", s.kind == "mock" ? defaults.model_id : std::string{});
    s.descriptor.version_tag = j.value("version_tag", s.kind == "mock" ? defaults.version_tag : std::string{});
    if (s.descriptor.model_id.empty()) throw Error("invalid-config", "backend entry without model_id");
    if (s.kind == "http" && s.descriptor.endpoint.empty())
        throw Error("invalid-config", "http backend '" + s.descriptor.model_id + "' has no endpoint");
    s.api_key_env = j.value("api_key_env", std::string{});
    s.token_limit = j.value("token_limit", std::size_t{77});
    s.options = j.value("options", nlohmann::json::object());
    return s;
}

nlohmann::json spec_to_json(const BackendSpec& s) {
    nlohmann::json j{{"role", role_name(s.descriptor.role)},
                     {"kind", s.kind},
                     {"endpoint", s.descriptor.endpoint},
                     {"model_id", s.descriptor.model_id},
                     {"version_tag", s.descriptor.version_tag},
                     {"options", s.options}};
    if (!s.api_key_env.empty()) j["api_key_env"] = s.api_key_env;
    if (s.descriptor.role == Role::CrossModalEmbed) j["token_limit"] = s.token_limit;
    return j;
}

MockEmbedderOptions mock_embedder_options(const nlohmann::json& o) {
    MockEmbedderOptions opts;
    opts.dim = o.value("dim", opts.dim);
    opts.base_seed = o.value("base_seed", opts.base_seed);
    opts.transform_seed = o.value("transform_seed", opts.transform_seed);
    const auto t = o.value("transform", std::string("none"));
    if (t == "rotate") opts.transform = MockTransform::Rotate;
    else if (t == "negate") opts.transform = MockTransform::Negate;
    else if (t != "none") throw Error("invalid-config", "unknown mock transform '" + t + "'");
    return opts;
}

HttpOptions http_options(const BackendSpec& s) {
    HttpOptions o;
    o.api_key_env = s.api_key_env;
    return o;
}

}  // namespace

BackendConfig BackendConfig::mock() {
    BackendConfig c;
    for (Role r : {Role::Caption, Role::TextToImage, Role::ImageEmbed, Role::CrossModalEmbed}) {
        BackendSpec s;
        s.descriptor = mock_descriptor(r);
        s.kind = "mock";
        c.specs.push_back(s);
    }
    return c;
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j) {
    BackendConfig c;
    try {
        for (const auto& entry : j.at("backends")) c.specs.push_back(spec_from_json(entry));
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid-config", e.what());
    }
    return c;
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("invalid-config", "cannot open " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid-config", path.string() + ": " + e.what());
    }
}

nlohmann::json BackendConfig::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : specs) arr.push_back(spec_to_json(s));
    return {{"backends", arr}};
}

const BackendSpec& BackendConfig::primary(Role role) const {
    for (const auto& s : specs)
        if (s.descriptor.role == role) return s;
    throw Error("missing-backend", "no " + std::string(role_name(role)) + " backend configured");
}

std::vector<BackendSpec> BackendConfig::all(Role role) const {
    std::vector<BackendSpec> out;
    for (const auto& s : specs)
        if (s.descriptor.role == role) out.push_back(s);
    return out;
}

std::shared_ptr<ImageEmbedder> build_image_embedder(const BackendSpec& spec, const std::optional<ReplaySource>& replay) {
    if (replay) return std::make_shared<ReplayImageEmbedder>(spec.descriptor, *replay);
    if (spec.kind == "mock") return std::make_shared<MockImageEmbedder>(spec.descriptor, mock_embedder_options(spec.options));
    return std::make_shared<HttpImageEmbedder>(spec.descriptor, http_options(spec));
}

BackendSet build_backends(const BackendConfig& config, const std::optional<ReplaySource>& replay) {
    BackendSet set;
    auto find = [&](Role r) -> const BackendSpec* {
        for (const auto& s : config.specs)
            if (s.descriptor.role == r) return &s;
        return nullptr;
    };
    if (const auto* s = find(Role::Caption)) {
        if (replay) {
            set.caption = std::make_shared<ReplayCaptionModel>(s->descriptor, *replay);
        } else if (s->kind == "mock") {
            std::set<std::int64_t> empty;
            for (const auto& n : s->options.value("empty_nonces", nlohmann::json::array())) empty.insert(n.get<std::int64_t>());
            set.caption = std::make_shared<MockCaptionModel>(s->descriptor, std::move(empty));
        } else {
            set.caption = std::make_shared<HttpCaptionModel>(s->descriptor, http_options(*s));
        }
    }
    if (const auto* s = find(Role::TextToImage)) {
        if (replay) set.t2i = std::make_shared<ReplayImageGenerator>(s->descriptor, *replay);
        else if (s->kind == "mock") set.t2i = std::make_shared<MockImageGenerator>(s->descriptor);
        else set.t2i = std::make_shared<HttpImageGenerator>(s->descriptor, http_options(*s));
    }
    if (const auto* s = find(Role::ImageEmbed)) set.image_embedder = build_image_embedder(*s, replay);
    if (const auto* s = find(Role::CrossModalEmbed)) {
        if (replay) set.crossmodal = std::make_shared<ReplayCrossModalEmbedder>(s->descriptor, s->token_limit, *replay);
        else if (s->kind == "mock")
            set.crossmodal = std::make_shared<MockCrossModalEmbedder>(s->descriptor, s->token_limit,
                                                                      s->options.value("dim", std::size_t{64}));
        else set.crossmodal = std::make_shared<HttpCrossModalEmbedder>(s->descriptor, s->token_limit, http_options(*s));
    }
    return set;
}

}  // namespace reconkit::backends

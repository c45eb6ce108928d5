#include "reconkit/backends/types.hpp"

#include <cmath>

#include "reconkit/error.hpp"

namespace reconkit::backends {

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Caption: return "caption";
        case Role::TextToImage: return "t2i";
        case Role::ImageEmbed: return "image-embed";
        case Role::CrossModalEmbed: return "crossmodal-embed";
    }
    return "unknown";
}

Role parse_role(std::string_view name) {
    if (name == "caption") return Role::Caption;
    if (name == "t2i") return Role::TextToImage;
    if (name == "image-embed") return Role::ImageEmbed;
    if (name == "crossmodal-embed") return Role::CrossModalEmbed;
    throw Error("invalid-config", "unknown backend role '" + std::string(name) + "'");
}

std::string BackendDescriptor::identity() const {
    return std::string(role_name(role)) + "/" + model_id + "@" + version_tag;
}

nlohmann::json BackendDescriptor::identity_json() const {
    return {{"role", role_name(role)}, {"model_id", model_id}, {"version_tag", version_tag}};
}

void GenerationParams::validate() const {
    if (steps < 1) throw Error("invalid-params", "steps must be >= 1");
    if (max_prompt_tokens < 1) throw Error("invalid-params", "max_prompt_tokens must be >= 1");
    if (max_dim_px < 1) throw Error("invalid-params", "max_dim_px must be >= 1");
}

nlohmann::json GenerationParams::to_json() const {
    return {{"seed", seed}, {"steps", steps}, {"max_prompt_tokens", max_prompt_tokens}, {"max_dim_px", max_dim_px}};
}

GenerationParams GenerationParams::from_json(const nlohmann::json& j) {
    GenerationParams p;
    p.seed = j.value("seed", p.seed);
    p.steps = j.value("steps", p.steps);
    p.max_prompt_tokens = j.value("max_prompt_tokens", p.max_prompt_tokens);
    p.max_dim_px = j.value("max_dim_px", p.max_dim_px);
    p.validate();
    return p;
}

EmbeddingVector::EmbeddingVector(std::vector<double> raw, std::string backend)
    : values_(std::move(raw)), backend_(std::move(backend)) {
    double norm2 = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error("degenerate-embedding", "non-finite component from " + backend_);
        norm2 += v * v;
    }
    if (values_.empty() || norm2 == 0.0) throw Error("degenerate-embedding", "zero vector from " + backend_);
    const double norm = std::sqrt(norm2);
    for (double& v : values_) v /= norm;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw Error("dim-mismatch", std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
    return dot;
}

}  // namespace reconkit::backends

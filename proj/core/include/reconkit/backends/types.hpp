#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace reconkit::backends {

enum class Role { Caption, TextToImage, ImageEmbed, CrossModalEmbed };

std::string_view role_name(Role role);
/// Accepts "caption", "t2i", "image-embed", "crossmodal-embed".
Role parse_role(std::string_view name);

/// (role, model_id, version_tag) identifies backend behaviour; the endpoint
/// only says where to reach it.
struct BackendDescriptor {
    Role role = Role::Caption;
    std::string endpoint;
    std::string model_id;
    std::string version_tag;

    std::string identity() const;
    /// Identity triple only, for cache keys.
    nlohmann::json identity_json() const;
};

struct GenerationParams {
    std::int64_t seed = 0;
    int steps = 28;
    int max_prompt_tokens = 512;
    int max_dim_px = 1024;

    void validate() const;
    nlohmann::json to_json() const;
    static GenerationParams from_json(const nlohmann::json& j);

    friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

/// Unit-length embedding. Construction normalizes; zero or empty input throws
/// "degenerate-embedding".
class EmbeddingVector {
public:
    EmbeddingVector(std::vector<double> raw, std::string backend);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    const std::string& backend() const noexcept { return backend_; }

private:
    std::vector<double> values_;
    std::string backend_;
};

/// Inner product of two unit vectors; throws "dim-mismatch".
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct CaptionCandidate {
    int index = 0;  // 1-based position within its candidate set
    std::string text;
    double temperature = 0.0;
    std::int64_t nonce = 0;
    std::string backend;
};

}  // namespace reconkit::backends

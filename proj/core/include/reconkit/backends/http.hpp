#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "reconkit/backends/interfaces.hpp"

namespace reconkit::backends {

struct Endpoint {
    std::string scheme_host_port;  // "http://host:port"
    std::string path;              // "/v1/chat/completions"
};

/// Splits "http[s]://host[:port][/path]"; throws "invalid-endpoint".
Endpoint parse_endpoint(const std::string& url, const std::string& default_path);

struct HttpOptions {
    /// Name of the environment variable holding a bearer token; empty = none.
    std::string api_key_env;
    std::chrono::seconds timeout{300};
};

/// JSON POST helper. Connection failures and 502/503/504 raise
/// TransportError; other non-2xx statuses raise "backend-refused".
class JsonHttpClient {
public:
    JsonHttpClient(const std::string& url, const std::string& default_path, HttpOptions options);
    nlohmann::json post(const nlohmann::json& body) const;

private:
    Endpoint endpoint_;
    HttpOptions options_;
    std::string bearer_;
};

/// Chat-completion shape:
///   POST {"model", "temperature", "seed", "messages": [system, user(image_url data URI)]}
///   <- {"choices": [{"message": {"content": "..."}}]}
class HttpCaptionModel final : public CaptionModel {
public:
    HttpCaptionModel(BackendDescriptor descriptor, HttpOptions options = {});
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::string caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                        std::int64_t nonce) override;
    std::string complete(std::string_view prompt, double temperature, std::int64_t nonce) override;

    static nlohmann::json caption_request(const BackendDescriptor& d, const ImageRecord& image,
                                          std::string_view system_prompt, double temperature, std::int64_t nonce);

private:
    BackendDescriptor descriptor_;
    JsonHttpClient client_;
};

/// Text-to-image shape:
///   POST {"model", "prompt", "seed", "steps", "width", "height", "max_prompt_tokens"}
///   <- {"image_base64": "..."}  (or {"data": [{"b64_json": "..."}]})
class HttpImageGenerator final : public ImageGenerator {
public:
    HttpImageGenerator(BackendDescriptor descriptor, HttpOptions options = {});
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<std::uint8_t> generate(std::string_view prompt, const GenerationParams& params,
                                       ImageSize size) override;

    static nlohmann::json generation_request(const BackendDescriptor& d, std::string_view prompt,
                                             const GenerationParams& params, ImageSize size);

private:
    BackendDescriptor descriptor_;
    JsonHttpClient client_;
};

/// Embedding shape:
///   POST {"model", "image_base64"} or {"model", "text"}
///   <- {"embedding": [...]}  (or {"data": [{"embedding": [...]}]})
class HttpImageEmbedder final : public ImageEmbedder {
public:
    HttpImageEmbedder(BackendDescriptor descriptor, HttpOptions options = {});
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<double> embed(const ImageRecord& image) override;

private:
    BackendDescriptor descriptor_;
    JsonHttpClient client_;
};

class HttpCrossModalEmbedder final : public CrossModalEmbedder {
public:
    HttpCrossModalEmbedder(BackendDescriptor descriptor, std::size_t token_limit, HttpOptions options = {});
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<double> embed_text(std::string_view text) override;
    std::vector<double> embed_image(const ImageRecord& image) override;
    std::size_t token_limit() const override { return token_limit_; }

private:
    BackendDescriptor descriptor_;
    std::size_t token_limit_;
    JsonHttpClient client_;
};

std::vector<double> parse_embedding_response(const nlohmann::json& response);

}  // namespace reconkit::backends

#include "httplib.h"

#include "reconkit/backends/http.hpp"

#include <cstdlib>
#include <regex>

#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

namespace reconkit::backends {

Endpoint parse_endpoint(const std::string& url, const std::string& default_path) {
    static const std::regex kUrl(R"(^(https?)://([^/\s]+)(/\S*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) throw Error("invalid-endpoint", "cannot parse '" + url + "'");
    Endpoint e;
    e.scheme_host_port = m[1].str() + "://" + m[2].str();
    e.path = m[3].matched && m[3].str() != "/" ? m[3].str() : default_path;
    return e;
}

JsonHttpClient::JsonHttpClient(const std::string& url, const std::string& default_path, HttpOptions options)
    : endpoint_(parse_endpoint(url, default_path)), options_(std::move(options)) {
    if (!options_.api_key_env.empty()) {
        const char* value = std::getenv(options_.api_key_env.c_str());
        if (value == nullptr)
            throw Error("missing-credentials", "environment variable " + options_.api_key_env + " is not set");
        bearer_ = value;
    }
}

nlohmann::json JsonHttpClient::post(const nlohmann::json& body) const {
    httplib::Client client(endpoint_.scheme_host_port);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);
    const auto res = client.Post(endpoint_.path, headers, body.dump(), "application/json");
    const std::string where = endpoint_.scheme_host_port + endpoint_.path;
    if (!res) throw TransportError(httplib::to_string(res.error()) + " (" + where + ")");
    if (res->status == 502 || res->status == 503 || res->status == 504)
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + where);
    if (res->status < 200 || res->status >= 300)
        throw Error("backend-refused", "HTTP " + std::to_string(res->status) + " from " + where + ": " +
                                           res->body.substr(0, 512));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad-response", where + ": " + e.what());
    }
}

namespace {

std::string data_uri(const ImageRecord& image) {
    const std::string mime = image.format == "png" ? "image/png" : "image/x-portable-anymap";
    return "data:" + mime + ";base64," + base64_encode(*image.bytes);
}

std::string chat_content(const nlohmann::json& response) {
    try {
        const auto& content = response.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return content.get<std::string>();
        // Some servers return a list of content parts.
        std::string text;
        for (const auto& part : content)
            if (part.value("type", "") == "text") text += part.value("text", "");
        return text;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad-response", std::string("chat completion: ") + e.what());
    }
}

}  // namespace

std::vector<double> parse_embedding_response(const nlohmann::json& response) {
    try {
        if (response.contains("embedding")) return response.at("embedding").get<std::vector<double>>();
        return response.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad-response", std::string("embedding: ") + e.what());
    }
}

// ---------------------------------------------------------------- caption

HttpCaptionModel::HttpCaptionModel(BackendDescriptor descriptor, HttpOptions options)
    : descriptor_(std::move(descriptor)), client_(descriptor_.endpoint, "/v1/chat/completions", std::move(options)) {}

nlohmann::json HttpCaptionModel::caption_request(const BackendDescriptor& d, const ImageRecord& image,
                                                 std::string_view system_prompt, double temperature,
                                                 std::int64_t nonce) {
    return {{"model", d.model_id},
            {"temperature", temperature},
            {"seed", nonce},
            {"messages",
             {{{"role", "system"}, {"content", std::string(system_prompt)}},
              {{"role", "user"},
               {"content", {{{"type", "image_url"}, {"image_url", {{"url", data_uri(image)}}}}}}}}}};
}

std::string HttpCaptionModel::caption(const ImageRecord& image, std::string_view system_prompt, double temperature,
                                      std::int64_t nonce) {
    return chat_content(client_.post(caption_request(descriptor_, image, system_prompt, temperature, nonce)));
}

std::string HttpCaptionModel::complete(std::string_view prompt, double temperature, std::int64_t nonce) {
    const nlohmann::json body{{"model", descriptor_.model_id},
                              {"temperature", temperature},
                              {"seed", nonce},
                              {"messages", {{{"role", "user"}, {"content", std::string(prompt)}}}}};
    return chat_content(client_.post(body));
}

// ---------------------------------------------------------------- t2i

HttpImageGenerator::HttpImageGenerator(BackendDescriptor descriptor, HttpOptions options)
    : descriptor_(std::move(descriptor)), client_(descriptor_.endpoint, "/v1/images/generations", std::move(options)) {}

nlohmann::json HttpImageGenerator::generation_request(const BackendDescriptor& d, std::string_view prompt,
                                                      const GenerationParams& params, ImageSize size) {
    return {{"model", d.model_id},
            {"prompt", std::string(prompt)},
            {"seed", params.seed},
            {"steps", params.steps},
            {"width", size.width},
            {"height", size.height},
            {"max_prompt_tokens", params.max_prompt_tokens}};
}

std::vector<std::uint8_t> HttpImageGenerator::generate(std::string_view prompt, const GenerationParams& params,
                                                       ImageSize size) {
    const auto response = client_.post(generation_request(descriptor_, prompt, params, size));
    try {
        if (response.contains("image_base64")) return base64_decode(response.at("image_base64").get<std::string>());
        return base64_decode(response.at("data").at(0).at("b64_json").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad-response", std::string("image generation: ") + e.what());
    }
}

// ---------------------------------------------------------------- embedders

HttpImageEmbedder::HttpImageEmbedder(BackendDescriptor descriptor, HttpOptions options)
    : descriptor_(std::move(descriptor)), client_(descriptor_.endpoint, "/v1/embeddings", std::move(options)) {}

std::vector<double> HttpImageEmbedder::embed(const ImageRecord& image) {
    return parse_embedding_response(
        client_.post({{"model", descriptor_.model_id}, {"image_base64", base64_encode(*image.bytes)}}));
}

HttpCrossModalEmbedder::HttpCrossModalEmbedder(BackendDescriptor descriptor, std::size_t token_limit,
                                               HttpOptions options)
    : descriptor_(std::move(descriptor)),
      token_limit_(token_limit),
      client_(descriptor_.endpoint, "/v1/embeddings", std::move(options)) {}

std::vector<double> HttpCrossModalEmbedder::embed_text(std::string_view text) {
    return parse_embedding_response(client_.post({{"model", descriptor_.model_id}, {"text", std::string(text)}}));
}

std::vector<double> HttpCrossModalEmbedder::embed_image(const ImageRecord& image) {
    return parse_embedding_response(
        client_.post({{"model", descriptor_.model_id}, {"image_base64", base64_encode(*image.bytes)}}));
}

}  // namespace reconkit::backends

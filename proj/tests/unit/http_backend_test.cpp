#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "fixtures.hpp"
#include "reconkit/backends/http.hpp"
#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"

using namespace reconkit;
using namespace reconkit::backends;
using nlohmann::json;

namespace {

/// Local stand-in for the three model servers.
class FakeModelServer {
public:
    FakeModelServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            last_body = json::parse(req.body);
            res.set_content(json{{"choices", {{{"message", {{"content", "a harbor seen from above"}}}}}}}.dump(),
                            "application/json");
        });
        server_.Post("/v1/images/generations", [this](const httplib::Request& req, httplib::Response& res) {
            last_body = json::parse(req.body);
            const auto img = fixtures::random_image(9, last_body.at("width"), last_body.at("height"));
            res.set_content(json{{"data", {{{"b64_json", base64_encode(*img.bytes)}}}}}.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            last_body = json::parse(req.body);
            res.set_content(json{{"embedding", {1.0, 2.0, 2.0}}}.dump(), "application/json");
        });
        server_.Post("/busy", [this](const httplib::Request&, httplib::Response& res) {
            ++busy_calls;
            res.status = 503;
        });
        server_.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeModelServer() {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& path = {}) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

    std::string last_auth;
    json last_body;
    std::atomic<int> busy_calls{0};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(Http, ParseEndpoint) {
    const auto e = parse_endpoint("http://localhost:9000", "/v1/x");
    EXPECT_EQ(e.scheme_host_port, "http://localhost:9000");
    EXPECT_EQ(e.path, "/v1/x");
    EXPECT_EQ(parse_endpoint("https://api.example.org/custom/path", "/v1/x").path, "/custom/path");
    EXPECT_THROW(parse_endpoint("ftp://host", "/"), Error);
}

TEST(Http, CaptionRequestShapeAndBearer) {
    FakeModelServer fake;
    ::setenv("RECONKIT_TEST_KEY", "sekret", 1);
    HttpCaptionModel model({Role::Caption, fake.url(), "vlm", "2024"}, {"RECONKIT_TEST_KEY"});
    const auto img = fixtures::random_image(3);
    EXPECT_EQ(model.caption(img, "describe", 0.8, 4), "a harbor seen from above");
    EXPECT_EQ(fake.last_auth, "Bearer sekret");
    EXPECT_EQ(fake.last_body.at("model"), "vlm");
    EXPECT_EQ(fake.last_body.at("messages").at(0).at("content"), "describe");
    const std::string uri = fake.last_body.at("messages").at(1).at("content").at(0).at("image_url").at("url");
    EXPECT_EQ(uri.rfind("data:image/png;base64,", 0), 0u);
}

TEST(Http, ImageAndEmbeddingShapes) {
    FakeModelServer fake;
    HttpImageGenerator gen({Role::TextToImage, fake.url(), "t2i", "1"});
    GenerationParams p{3, 20, 512, 1024};
    const auto bytes = gen.generate("a harbor", p, {24, 16});
    EXPECT_EQ(image_from_bytes("r", bytes).size, (ImageSize{24, 16}));
    EXPECT_EQ(fake.last_body.at("prompt"), "a harbor");
    EXPECT_EQ(fake.last_body.at("seed"), 3);
    EXPECT_EQ(fake.last_body.at("steps"), 20);

    HttpImageEmbedder emb({Role::ImageEmbed, fake.url(), "dreamsim", "1"});
    EXPECT_EQ(emb.embed(fixtures::random_image(5)), (std::vector<double>{1.0, 2.0, 2.0}));
    EXPECT_TRUE(fake.last_body.contains("image_base64"));

    HttpCrossModalEmbedder clip({Role::CrossModalEmbed, fake.url(), "clip", "1"}, 77);
    EXPECT_EQ(clip.embed_text("boats").size(), 3u);
    EXPECT_EQ(fake.last_body.at("text"), "boats");
}

TEST(Http, StatusClassification) {
    FakeModelServer fake;
    JsonHttpClient busy(fake.url("/busy"), "/", {});
    EXPECT_THROW(busy.post(json::object()), TransportError);
    JsonHttpClient bad(fake.url("/bad"), "/", {});
    try {
        bad.post(json::object());
        FAIL();
    } catch (const TransportError&) {
        FAIL() << "400 must not be retryable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "backend-refused");
    }
    JsonHttpClient nobody("http://127.0.0.1:1", "/", {std::string(), std::chrono::seconds(2)});
    EXPECT_THROW(nobody.post(json::object()), TransportError);
}

TEST(Http, EmbeddingResponseForms) {
    EXPECT_EQ(parse_embedding_response(json{{"embedding", {1, 2}}}), (std::vector<double>{1, 2}));
    EXPECT_EQ(parse_embedding_response(json{{"data", {{{"embedding", {3}}}}}}), (std::vector<double>{3}));
    EXPECT_THROW(parse_embedding_response(json{{"nope", 1}}), Error);
}

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <fstream>

#include "fixtures.hpp"
#include "reconkit/backends/clients.hpp"
#include "reconkit/backends/config.hpp"
#include "reconkit/backends/ledger.hpp"
#include "reconkit/backends/mock.hpp"
#include "reconkit/backends/replay.hpp"
#include "reconkit/backends/tokens.hpp"
#include "reconkit/error.hpp"

using namespace reconkit;
using namespace reconkit::backends;

namespace {

std::string code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return {};
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

class FlakyGenerator final : public ImageGenerator {
public:
    FlakyGenerator(int failures, bool transport) : failures_(failures), transport_(transport) {}
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<std::uint8_t> generate(std::string_view, const GenerationParams&, ImageSize size) override {
        ++calls;
        if (calls <= failures_) {
            if (transport_) throw TransportError("503");
            throw Error("backend-refused", "400");
        }
        return *fixtures::random_image(1, size.width, size.height).bytes;
    }
    std::atomic<int> calls{0};

private:
    BackendDescriptor descriptor_{Role::TextToImage, "local", "flaky", "1"};
    int failures_;
    bool transport_;
};

class SquareGenerator final : public ImageGenerator {
public:
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<std::uint8_t> generate(std::string_view, const GenerationParams&, ImageSize) override {
        return *fixtures::random_image(2, 10, 10).bytes;
    }

private:
    BackendDescriptor descriptor_{Role::TextToImage, "local", "square", "1"};
};

}  // namespace

TEST(Types, RoleNamesRoundTrip) {
    for (auto r : {Role::Caption, Role::TextToImage, Role::ImageEmbed, Role::CrossModalEmbed})
        EXPECT_EQ(parse_role(role_name(r)), r);
    EXPECT_THROW(parse_role("painter"), Error);
}

TEST(Types, IdentityIgnoresEndpoint) {
    BackendDescriptor a{Role::TextToImage, "http://a:1", "m", "v"};
    BackendDescriptor b{Role::TextToImage, "http://b:2", "m", "v"};
    EXPECT_EQ(a.identity(), b.identity());
    EXPECT_EQ(a.identity_json(), b.identity_json());
    b.version_tag = "w";
    EXPECT_NE(a.identity(), b.identity());
}

TEST(Types, GenerationParamsJsonAndValidation) {
    GenerationParams p{7, 12, 300, 256};
    EXPECT_EQ(GenerationParams::from_json(p.to_json()), p);
    EXPECT_NO_THROW(p.validate());
    p.steps = 0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(Types, EmbeddingNormalizesAndRejectsZero) {
    EmbeddingVector v({3.0, 4.0}, "b");
    EXPECT_DOUBLE_EQ(v.values()[0], 0.6);
    EXPECT_DOUBLE_EQ(v.values()[1], 0.8);
    EXPECT_EQ(code_of([] { EmbeddingVector({0.0, 0.0}, "b"); }), "degenerate-embedding");
    EXPECT_EQ(code_of([] { EmbeddingVector({}, "b"); }), "degenerate-embedding");
    EXPECT_EQ(code_of([&] { cosine(v, EmbeddingVector({1, 2, 3}, "b")); }), "dim-mismatch");
    EXPECT_NEAR(cosine(v, EmbeddingVector({-3, -4}, "b")), -1.0, 1e-15);
}

TEST(Tokens, WhitespaceCountAndTruncate) {
    const auto& t = whitespace_tokens();
    EXPECT_EQ(t.count("  a  b\tc\n"), 3u);
    EXPECT_EQ(t.count(""), 0u);
    EXPECT_EQ(t.truncate("a b c d", 2), "a b");
    EXPECT_EQ(t.truncate("a b", 5), "a b");
}

TEST(Mock, CaptionDeterministicPerNonce) {
    MockCaptionModel m(mock_descriptor(Role::Caption));
    const auto img = fixtures::random_image(1);
    EXPECT_EQ(m.caption(img, "p", 0.8, 1), m.caption(img, "p", 0.8, 1));
    EXPECT_NE(m.caption(img, "p", 0.8, 1), m.caption(img, "p", 0.8, 2));
    EXPECT_EQ(m.caption(img, "p", 0.0, 1), m.caption(img, "p", 0.0, 2));
}

TEST(Mock, GeneratorPromptSensitiveAndSizedExactly) {
    MockImageGenerator g(mock_descriptor(Role::TextToImage));
    GenerationParams p;
    const auto a = image_from_bytes("a", g.generate("harbor", p, {30, 20}));
    const auto b = image_from_bytes("b", g.generate("runway", p, {30, 20}));
    const auto a2 = image_from_bytes("a", g.generate("harbor", p, {30, 20}));
    EXPECT_NE(a.checksum, b.checksum);
    EXPECT_EQ(a.checksum, a2.checksum);
    EXPECT_EQ(a.size, (ImageSize{30, 20}));
    p.seed = 1;
    EXPECT_NE(image_from_bytes("c", g.generate("harbor", p, {30, 20})).checksum, a.checksum);
}

TEST(Mock, RotatedEmbedderPreservesInnerProducts) {
    MockImageEmbedder base(mock_descriptor(Role::ImageEmbed));
    MockImageEmbedder rot({Role::ImageEmbed, "mock://r", "rot", "1"}, {64, 0, MockTransform::Rotate, 5});
    MockImageEmbedder neg({Role::ImageEmbed, "mock://n", "neg", "1"}, {64, 0, MockTransform::Negate, 1});
    const auto i1 = fixtures::random_image(11), i2 = fixtures::random_image(12);
    const auto b1 = base.embed(i1), b2 = base.embed(i2);
    const auto r1 = rot.embed(i1), r2 = rot.embed(i2);
    EXPECT_NEAR(dot(b1, b2), dot(r1, r2), 1e-9);
    EXPECT_NEAR(dot(b1, b1), dot(r1, r1), 1e-9);
    EXPECT_GT(std::fabs(r1[0] - b1[0]) + std::fabs(r1[1] - b1[1]), 1e-6);
    const auto n1 = neg.embed(i1);
    for (std::size_t k = 0; k < b1.size(); ++k) EXPECT_EQ(n1[k], -b1[k]);
}

TEST(Clients, CaptionValidation) {
    fixtures::TempDir dir;
    auto set = build_backends(BackendConfig::mock());
    set.caption = std::make_shared<MockCaptionModel>(mock_descriptor(Role::Caption), std::set<std::int64_t>{2});
    auto clients = fixtures::mock_clients(dir.path(), set);
    const auto img = fixtures::random_image(1);
    EXPECT_FALSE(clients->generate_caption(img, "p", 0.8, 1).text.empty());
    EXPECT_EQ(code_of([&] { clients->generate_caption(img, "p", 0.8, 2); }), "empty-generation");
    EXPECT_EQ(code_of([&] { clients->generate_caption(img, "p", -0.1, 1); }), "invalid-argument");
}

TEST(Clients, ImageGenerationChecks) {
    fixtures::TempDir dir;
    auto clients = fixtures::mock_clients(dir.path());
    GenerationParams p;
    p.max_prompt_tokens = 3;
    EXPECT_EQ(code_of([&] { clients->generate_image("one two three four", p, {8, 8}); }), "token-limit");
    const auto img = clients->generate_image("one two three", p, {8, 8});
    EXPECT_TRUE(clients->blobs()->contains(img.checksum));

    auto set = build_backends(BackendConfig::mock());
    set.t2i = std::make_shared<SquareGenerator>();
    auto bad = fixtures::mock_clients(dir.path(), set);
    EXPECT_EQ(code_of([&] { bad->generate_image("x", {}, {20, 10}); }), "bad-dimensions");
}

TEST(Clients, RetriesTransportErrorsOnly) {
    fixtures::TempDir dir;
    auto set = build_backends(BackendConfig::mock());
    auto flaky = std::make_shared<FlakyGenerator>(2, true);
    set.t2i = flaky;
    auto clients = fixtures::mock_clients(dir.path(), set);
    EXPECT_NO_THROW(clients->generate_image("x", {}, {8, 8}));
    EXPECT_EQ(flaky->calls.load(), 3);

    auto dead = std::make_shared<FlakyGenerator>(5, true);
    set.t2i = dead;
    auto clients2 = fixtures::mock_clients(dir.path(), set);
    EXPECT_THROW(clients2->generate_image("x", {}, {8, 8}), TransportError);
    EXPECT_EQ(dead->calls.load(), 3);

    auto refusing = std::make_shared<FlakyGenerator>(1, false);
    set.t2i = refusing;
    auto clients3 = fixtures::mock_clients(dir.path(), set);
    EXPECT_EQ(code_of([&] { clients3->generate_image("x", {}, {8, 8}); }), "backend-refused");
    EXPECT_EQ(refusing->calls.load(), 1);
}

TEST(Clients, CrossModalLimits) {
    fixtures::TempDir dir;
    auto clients = fixtures::mock_clients(dir.path());
    EXPECT_EQ(code_of([&] { clients->embed_crossmodal_text("   "); }), "empty-input");
    std::string long_text;
    for (int i = 0; i < 78; ++i) long_text += "w ";
    try {
        clients->embed_crossmodal_text(long_text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "token-limit");
        EXPECT_NE(e.detail().find("77"), std::string::npos);
    }
    EXPECT_EQ(clients->embed_crossmodal_text("a harbor").dim(), 64u);
}

TEST(Ledger, SaveLoadCanonical) {
    fixtures::TempDir dir;
    CallLedger a, b;
    const LedgerEntry e1{"t2i", "x", "k1", "miss", 0, {{"blob", "c1"}}};
    const LedgerEntry e2{"caption", "y", "k2", "miss", 0, {{"text", "hi"}}};
    a.record(e1);
    a.record(e2);
    b.record(e2);
    b.record(e1);
    a.save(dir / "a.jsonl");
    b.save(dir / "b.jsonl");
    std::ifstream fa(dir / "a.jsonl"), fb(dir / "b.jsonl");
    EXPECT_EQ(std::string(std::istreambuf_iterator<char>(fa), {}), std::string(std::istreambuf_iterator<char>(fb), {}));
    const auto loaded = CallLedger::load(dir / "a.jsonl");
    EXPECT_EQ(loaded->size(), 2u);
    EXPECT_EQ(loaded->find_response("caption", "k2")->at("text"), "hi");
    EXPECT_FALSE(loaded->find_response("caption", "k1").has_value());
}

TEST(Ledger, RequestKeysSeparateInputs) {
    const auto d = mock_descriptor(Role::Caption);
    EXPECT_EQ(caption_request_key(d, "c", "p", 0.8, 1), caption_request_key(d, "c", "p", 0.8, 1));
    EXPECT_NE(caption_request_key(d, "c", "p", 0.8, 1), caption_request_key(d, "c", "p", 0.8, 2));
    EXPECT_NE(caption_request_key(d, "c", "p", 0.8, 1), caption_request_key(d, "c", "p", 0.7, 1));
    const auto t = mock_descriptor(Role::TextToImage);
    GenerationParams p;
    const auto k = image_request_key(t, "x", p, {4, 4});
    p.steps += 1;
    EXPECT_NE(image_request_key(t, "x", p, {4, 4}), k);
    EXPECT_NE(image_request_key(t, "x", {}, {4, 5}), k);
}

TEST(Replay, AnswersRecordedCallsAndRejectsOthers) {
    fixtures::TempDir dir;
    auto live = fixtures::mock_clients(dir / "blobs");
    const auto img = fixtures::random_image(4);
    const auto caption = live->generate_caption(img, "p", 0.8, 1).text;
    const auto rendering = live->generate_image("a harbor", {}, {12, 8});
    const auto vec = live->embed_image(img);

    ReplaySource source{live->ledger(), live->blobs()};
    auto replay = fixtures::mock_clients(dir / "replay-blobs", build_backends(BackendConfig::mock(), source));
    EXPECT_EQ(replay->generate_caption(img, "p", 0.8, 1).text, caption);
    EXPECT_EQ(replay->generate_image("a harbor", {}, {12, 8}).checksum, rendering.checksum);
    EXPECT_EQ(replay->embed_image(img).values(), vec.values());
    EXPECT_EQ(code_of([&] { replay->generate_caption(img, "p", 0.8, 2); }), "replay-missing");
}

TEST(Config, JsonRoundTripAndRoles) {
    const auto cfg = BackendConfig::load(fixtures::data_dir() / "two_embedders.json");
    EXPECT_EQ(cfg.all(Role::ImageEmbed).size(), 2u);
    EXPECT_EQ(cfg.primary(Role::ImageEmbed).descriptor.model_id, "mock-embedder");
    const auto again = BackendConfig::from_json(cfg.to_json());
    EXPECT_EQ(again.to_json(), cfg.to_json());
    const auto set = build_backends(cfg);
    EXPECT_TRUE(set.caption && set.t2i && set.image_embedder && set.crossmodal);
    const auto rotated = build_image_embedder(cfg.all(Role::ImageEmbed)[1]);
    EXPECT_EQ(rotated->descriptor().model_id, "mock-embedder-rotated");
}

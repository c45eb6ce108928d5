#include <gtest/gtest.h>

#include <atomic>
#include <fstream>

#include "fixtures.hpp"
#include "golden.hpp"
#include "reconkit/backends/mock.hpp"
#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"
#include "reconkit/recon/cache.hpp"
#include "reconkit/recon/prompt.hpp"
#include "reconkit/recon/recon_score.hpp"

using namespace reconkit;
using namespace reconkit::recon;
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

std::string words(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
    return s;
}

std::vector<double> axis(std::size_t k, double sign = 1.0) {
    std::vector<double> v(8, 0.0);
    v[k] = sign;
    return v;
}

ReconScorer fixed_scorer(const std::filesystem::path& dir, const ImageRecord& image, std::vector<double> other) {
    auto set = build_backends(BackendConfig::mock());
    set.image_embedder = std::make_shared<fixtures::FixedEmbedder>(image.checksum, axis(0), std::move(other));
    return ReconScorer({fixtures::mock_clients(dir, set), {}, nullptr, 1, std::nullopt});
}

class FixedCrossModal final : public CrossModalEmbedder {
public:
    explicit FixedCrossModal(double cos) : cos_(cos) {}
    const BackendDescriptor& descriptor() const override { return d_; }
    std::vector<double> embed_text(std::string_view) override { return {cos_, std::sqrt(1 - cos_ * cos_)}; }
    std::vector<double> embed_image(const ImageRecord&) override { return {1.0, 0.0}; }
    std::size_t token_limit() const override { return 77; }

private:
    BackendDescriptor d_{Role::CrossModalEmbed, "local", "fixed-clip", "1"};
    double cos_;
};

/// Renders a different image on every call.
class DriftingGenerator final : public ImageGenerator {
public:
    const BackendDescriptor& descriptor() const override { return d_; }
    std::vector<std::uint8_t> generate(std::string_view, const GenerationParams&, ImageSize size) override {
        return *fixtures::random_image(100 + calls++, size.width, size.height).bytes;
    }
    std::atomic<int> calls{0};

private:
    BackendDescriptor d_{Role::TextToImage, "local", "drift", "1"};
};

}  // namespace

TEST(Prompt, GoldenChecksums) {
    for (const auto& c : golden::kWrapped) EXPECT_EQ(sha256_hex(wrap_perspective_prompt(c.caption)), c.sha256);
}

TEST(Prompt, ExactLayout) {
    EXPECT_EQ(wrap_perspective_prompt("  A harbor with boats. \n"),
              "I want a remote sensing image with a realistic satellite perspective view. A harbor with boats. "
              "Remember, I want a vertical remote sensing satellite perspective from top to bottom.");
    EXPECT_NE(wrap_perspective_prompt("Runway.").find(" Runway. "), std::string::npos);
}

TEST(Prompt, LongCaptionTruncatedToBudget) {
    const auto& t = whitespace_tokens();
    const std::size_t template_tokens = t.count(kPerspectivePrefix) + t.count(kPerspectiveSuffix);
    EXPECT_EQ(caption_token_budget(512), 512 - template_tokens);
    const auto wrapped = wrap_perspective_prompt(words(600), 512);
    EXPECT_EQ(t.count(wrapped), 512u);
    EXPECT_EQ(wrapped.rfind(kPerspectivePrefix, 0), 0u);
    EXPECT_EQ(wrapped.substr(wrapped.size() - kPerspectiveSuffix.size()), kPerspectiveSuffix);
    EXPECT_EQ(fit_caption(words(600), 512), words(static_cast<int>(512 - template_tokens)));
}

TEST(Prompt, Errors) {
    EXPECT_EQ(code_of([] { wrap_perspective_prompt(" \t "); }), "empty-caption");
    EXPECT_EQ(code_of([] { wrap_perspective_prompt("a", 20); }), "token-limit");
}

TEST(ReconAlgebra, ScoreIsAffineInCosine) {
    SplitMix64 rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double c = rng.uniform() * 2.0 - 1.0;
        EXPECT_NEAR(normalized_score(c), (c + 1.0) / 2.0, 1e-12);
    }
    EXPECT_EQ(normalized_score(1.0 + 5e-7), 1.0);
    EXPECT_EQ(normalized_score(-1.0 - 5e-7), 0.0);
    EXPECT_EQ(code_of([] { normalized_score(1.0 + 1e-5); }), "embedding-not-normalized");
    EXPECT_EQ(code_of([] { normalized_score(-1.1); }), "embedding-not-normalized");
}

TEST(ReconAlgebra, IdentityOrthogonalAntipodal) {
    fixtures::TempDir dir;
    const auto img = fixtures::random_image(7);
    const std::pair<std::vector<double>, double> cases[] = {{axis(0), 1.0}, {axis(3), 0.5}, {axis(0, -1.0), 0.0}};
    for (const auto& [other, want] : cases) {
        auto scorer = fixed_scorer(dir.path(), img, other);
        const auto r = scorer.score(img, "a harbor");
        EXPECT_EQ(r.score, want);
        EXPECT_EQ(r.score, (r.cosine + 1.0) / 2.0);
    }
}

TEST(ReconScore, ResultFieldsAndDeterminism) {
    fixtures::TempDir dir;
    auto clients = fixtures::mock_clients(dir.path());
    ReconScorer scorer({clients, {}, nullptr, 1, std::nullopt});
    const auto img = fixtures::random_image(8, 40, 20);
    const auto a = scorer.score(img, "a harbor with boats");
    const auto b = scorer.score(img, "a harbor with boats");
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_FALSE(a.cache_hit);
    EXPECT_GE(a.score, 0.0);
    EXPECT_LE(a.score, 1.0);
    EXPECT_NEAR(a.score, (a.cosine + 1) / 2, 1e-12);
    EXPECT_EQ(a.wrapped_prompt, wrap_perspective_prompt("a harbor with boats"));
    EXPECT_EQ(a.image_checksum, img.checksum);
    EXPECT_EQ(a.reconstructed_size, (ImageSize{40, 20}));
    EXPECT_TRUE(clients->blobs()->contains(a.reconstructed_image));
    EXPECT_EQ(ReconScoreResult::from_json(a.to_json()).to_json(), a.to_json());
}

TEST(ReconScore, LargeImagesRenderAtCappedSize) {
    fixtures::TempDir dir;
    ReconScorer scorer({fixtures::mock_clients(dir.path()), {0, 28, 512, 32}, nullptr, 1, std::nullopt});
    EXPECT_EQ(scorer.score(fixtures::random_image(8, 64, 48), "x").reconstructed_size, (ImageSize{32, 24}));
}

TEST(ClipStyle, FormulaAndLimit) {
    fixtures::TempDir dir;
    const auto img = fixtures::random_image(1);
    for (const auto& [cos, want] : {std::pair{0.4, 1.0}, std::pair{-0.2, 0.0}}) {
        auto set = build_backends(BackendConfig::mock());
        set.crossmodal = std::make_shared<FixedCrossModal>(cos);
        auto clients = fixtures::mock_clients(dir.path(), set);
        EXPECT_NEAR(clip_style_score(*clients, img, "a harbor"), want, 1e-12);
    }
    auto clients = fixtures::mock_clients(dir.path());
    try {
        clip_style_score(*clients, img, words(200));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "token-limit");
        EXPECT_NE(e.detail().find("77"), std::string::npos);
    }
}

TEST(CacheKey, EveryFieldMatters) {
    const auto t = mock_descriptor(Role::TextToImage), e = mock_descriptor(Role::ImageEmbed);
    const GenerationParams p;
    const auto base = CacheKey::compute("cap", t, e, p, kPromptTemplateVersion).digest;
    EXPECT_EQ(CacheKey::compute("cap", t, e, p, kPromptTemplateVersion).digest, base);
    EXPECT_NE(CacheKey::compute("cap2", t, e, p, kPromptTemplateVersion).digest, base);
    EXPECT_NE(CacheKey::compute("cap", t, e, p, "perspective-v2").digest, base);
    auto t2 = t;
    t2.version_tag = "v9";
    EXPECT_NE(CacheKey::compute("cap", t2, e, p, kPromptTemplateVersion).digest, base);
    auto e2 = e;
    e2.model_id = "other";
    EXPECT_NE(CacheKey::compute("cap", t, e2, p, kPromptTemplateVersion).digest, base);
    for (int field = 0; field < 4; ++field) {
        GenerationParams q;
        fixtures::bump_param(q, field);
        EXPECT_NE(CacheKey::compute("cap", t, e, q, kPromptTemplateVersion).digest, base) << field;
    }
    const CacheKey k{base};
    EXPECT_NE(k.with_image("a"), k.with_image("b"));
}

TEST(Cache, HitReturnsStoredResultAndParamChangesMiss) {
    fixtures::TempDir dir;
    auto clients = fixtures::mock_clients(dir / "blobs");
    auto cache = std::make_shared<ReconCache>(dir / "cache");
    const auto img = fixtures::random_image(5);
    const GenerationParams base;
    ReconScorer scorer({clients, base, cache, 1, std::nullopt});
    const auto first = scorer.score(img, "a harbor");
    const auto second = scorer.score(img, "a harbor");
    EXPECT_FALSE(first.cache_hit);
    EXPECT_TRUE(second.cache_hit);
    auto strip = [](ReconScoreResult r) {
        r.cache_hit = false;
        return r.to_json();
    };
    EXPECT_EQ(strip(first), strip(second));

    for (int field = 0; field < 4; ++field) {
        GenerationParams q = base;
        fixtures::bump_param(q, field);
        ReconScorer changed({clients, q, cache, 1, std::nullopt});
        const auto r = changed.score(img, "a harbor");
        EXPECT_FALSE(r.cache_hit) << field;
        EXPECT_NE(r.cache_key, first.cache_key);
    }

    // Reopening the directory restores every record.
    ReconCache reopened(dir / "cache");
    EXPECT_EQ(reopened.size(), cache->size());
    EXPECT_EQ(reopened.find(first.cache_key)->to_json(), cache->find(first.cache_key)->to_json());
}

TEST(Cache, FirstWriterWinsAndCompactSorts) {
    fixtures::TempDir dir;
    ReconCache cache(dir / "c");
    ReconScoreResult a, b;
    a.score = 0.25;
    b.score = 0.75;
    EXPECT_TRUE(cache.insert("k2", a));
    EXPECT_FALSE(cache.insert("k2", b));
    EXPECT_EQ(cache.find("k2")->score, 0.25);
    EXPECT_TRUE(cache.insert("k1", b));
    EXPECT_EQ(cache.observe_t2i("r", "x"), "x");
    EXPECT_EQ(cache.observe_t2i("r", "y"), "x");
    cache.compact();
    std::ifstream in(dir / "c" / "records.jsonl");
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    EXPECT_LT(l1.find("k1"), std::string::npos);
    EXPECT_LT(l2.find("k2"), std::string::npos);
    ReconCache again(dir / "c");
    EXPECT_EQ(again.size(), 2u);
    EXPECT_EQ(again.t2i_observation("r"), "x");
}

TEST(Cache, CorruptLogIsReported) {
    fixtures::TempDir dir;
    std::filesystem::create_directories(dir / "c");
    std::ofstream(dir / "c" / "records.jsonl") << "{not json\n";
    EXPECT_EQ(code_of([&] { ReconCache c(dir / "c"); }), "corrupt-cache");
}

TEST(Batch, OrderDuplicatesAndFailures) {
    fixtures::TempDir dir;
    auto clients = fixtures::mock_clients(dir / "blobs");
    ReconScorer scorer({clients, {}, std::make_shared<ReconCache>(), 4, std::nullopt});
    EXPECT_TRUE(scorer.score_batch({}).empty());

    const auto i1 = fixtures::random_image(1), i2 = fixtures::random_image(2);
    const std::vector<ScoringPair> pairs{{i1, "a harbor"}, {i2, "   "}, {i1, "a harbor"}, {i2, "a runway"}};
    const auto out = scorer.score_batch(pairs);
    ASSERT_EQ(out.size(), 4u);
    EXPECT_TRUE(out[0].ok());
    EXPECT_FALSE(out[1].ok());
    EXPECT_EQ(out[1].error_code, "empty-caption");
    EXPECT_TRUE(out[2].ok());
    EXPECT_TRUE(out[3].ok());
    EXPECT_FALSE(out[0].result->cache_hit);
    EXPECT_TRUE(out[2].result->cache_hit);
    EXPECT_EQ(out[0].result->score, out[2].result->score);

    // Same answers sequentially and without a cache.
    fixtures::TempDir dir2;
    ReconScorer serial({fixtures::mock_clients(dir2.path()), {}, nullptr, 1, std::nullopt});
    EXPECT_EQ(serial.score(i2, "a runway").score, out[3].result->score);
}

TEST(Batch, ParallelMatchesSerial) {
    fixtures::TempDir d1, d2;
    std::vector<ScoringPair> pairs;
    for (int i = 0; i < 24; ++i) pairs.push_back({fixtures::random_image(i % 6), "caption " + std::to_string(i % 5)});
    ReconScorer a({fixtures::mock_clients(d1.path()), {}, std::make_shared<ReconCache>(), 1, std::nullopt});
    ReconScorer b({fixtures::mock_clients(d2.path()), {}, std::make_shared<ReconCache>(), 8, std::nullopt});
    const auto ra = a.score_batch(pairs), rb = b.score_batch(pairs);
    for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_EQ(ra[i].result->to_json(), rb[i].result->to_json());
    EXPECT_EQ(a.context().clients->ledger()->canonical_entries().size(),
              b.context().clients->ledger()->canonical_entries().size());
}

TEST(Drift, FirstObservationKept) {
    fixtures::TempDir dir;
    auto set = build_backends(BackendConfig::mock());
    set.t2i = std::make_shared<DriftingGenerator>();
    auto clients = fixtures::mock_clients(dir.path(), set);
    ReconScorer scorer({clients, {}, std::make_shared<ReconCache>(), 1, std::nullopt});
    // Two originals of the same size share one rendering request.
    const auto r1 = scorer.score(fixtures::random_image(1), "a harbor");
    const auto r2 = scorer.score(fixtures::random_image(2), "a harbor");
    EXPECT_EQ(r1.reconstructed_image, r2.reconstructed_image);
    int drift = 0;
    for (const auto& e : clients->ledger()->entries()) drift += e.status == "drift";
    EXPECT_EQ(drift, 1);
}

TEST(Dump, ReconstructionsWritten) {
    fixtures::TempDir dir;
    ReconScorer scorer({fixtures::mock_clients(dir / "blobs"), {}, nullptr, 1, dir / "dump"});
    const auto r = scorer.score(fixtures::random_image(3, 16, 12, "tile/7"), "a harbor");
    std::size_t files = 0;
    for (const auto& f : std::filesystem::directory_iterator(dir / "dump")) {
        ++files;
        EXPECT_NE(f.path().filename().string().find(r.cache_key.substr(0, 12)), std::string::npos);
        EXPECT_EQ(f.path().extension(), ".png");
    }
    EXPECT_EQ(files, 1u);
}

TEST(ReconScore, MissingBackendsRejected) {
    fixtures::TempDir dir;
    BackendSet empty;
    EXPECT_THROW(ReconScorer({fixtures::mock_clients(dir.path(), empty), {}, nullptr, 1, std::nullopt}), Error);
}

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "reconkit/error.hpp"
#include "reconkit/stats/preferences.hpp"

using namespace reconkit;
using namespace reconkit::stats;

TEST(Preferences, ValidateRanking) {
    EXPECT_NO_THROW(validate_ranking({2, 3, 1}));
    for (const auto& bad : std::vector<std::vector<int>>{{1, 1, 2}, {0, 1, 2}, {1, 2, 4}, {}}) {
        try {
            validate_ranking(bad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), "not-a-permutation");
        }
    }
}

TEST(Preferences, LoadSaveRoundTrip) {
    const auto prefs = load_preferences(fixtures::data_dir() / "toy_preferences.jsonl");
    ASSERT_EQ(prefs.size(), 3u);
    EXPECT_EQ(prefs[0].image_id, "harbor");
    EXPECT_EQ(prefs[0].candidates[1].model, "model-b");
    EXPECT_EQ(prefs[0].ranking, (std::vector<int>{1, 2, 3}));

    fixtures::TempDir dir;
    save_preferences(dir / "p.jsonl", prefs);
    const auto again = load_preferences(dir / "p.jsonl");
    ASSERT_EQ(again.size(), prefs.size());
    for (std::size_t i = 0; i < prefs.size(); ++i) EXPECT_EQ(to_json(again[i]), to_json(prefs[i]));
}

TEST(Preferences, PoolWithoutRankingNeedsOptIn) {
    EXPECT_THROW(load_preferences(fixtures::data_dir() / "toy_pool.jsonl"), Error);
    EXPECT_EQ(load_preferences(fixtures::data_dir() / "toy_pool.jsonl", false).size(), 3u);
}

TEST(Preferences, ExtraFieldsCarriedThrough) {
    auto j = nlohmann::json::parse(
        R"({"image_id":"x","candidates":[{"model":"m","text":"t"},{"model":"n","text":"u"}],"ranking":[2,1],"annotator":"ann-1"})");
    const auto p = preference_from_json(j);
    EXPECT_EQ(p.extra.at("annotator"), "ann-1");
    EXPECT_EQ(to_json(p).at("annotator"), "ann-1");
}

TEST(Preferences, FlattenMapsRanksToJudgments) {
    const auto prefs = load_preferences(fixtures::data_dir() / "toy_preferences.jsonl");
    CandidateScores scores{{0.9, 0.5, 0.1}, {0.8, 0.4, 0.2}, {0.7, 0.6, 0.3}};
    const auto s = flatten_preferences(prefs, scores);
    ASSERT_EQ(s.size(), 9u);
    EXPECT_TRUE(s.groups.empty());
    EXPECT_EQ(s.y[0], 3.0);  // rank 1 of K=3
    EXPECT_EQ(s.y[2], 1.0);
    EXPECT_EQ(s.x[4], 0.4);

    const auto g = flatten_preferences(prefs, scores, FlattenMode::PerInstance);
    EXPECT_EQ(g.groups, (std::vector<std::int64_t>{0, 0, 0, 1, 1, 1, 2, 2, 2}));
    EXPECT_EQ(kendall_tau_b(g).tau, 1.0);
}

TEST(Preferences, MissingScoreNamesTheCandidate) {
    const auto prefs = load_preferences(fixtures::data_dir() / "toy_preferences.jsonl");
    CandidateScores scores{{0.9, 0.5, 0.1}, {0.8, std::nullopt, 0.2}, {0.7, 0.6, 0.3}};
    try {
        flatten_preferences(prefs, scores);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "missing-score");
        EXPECT_NE(e.detail().find("runway"), std::string::npos);
    }
}

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "reconkit/annotation/store.hpp"
#include "reconkit/digest.hpp"
#include "reconkit/error.hpp"
#include "reconkit/stats/preferences.hpp"

using namespace reconkit;
using namespace reconkit::annotation;

namespace {

std::vector<stats::PreferenceInstance> pool() {
    return stats::load_preferences(fixtures::data_dir() / "toy_pool.jsonl", false);
}

AnnotationStore make_store(const std::filesystem::path& dir) {
    return AnnotationStore(dir, "toy", pool(), {{"harbor", "/images/h"}, {"runway", "/images/r"}, {"farmland", "/images/f"}},
                           [] { return std::string("2026-01-01T00:00:00Z"); });
}

/// Display-order ranks that de-blind to `original`.
std::vector<int> blind(const std::vector<int>& original, const std::vector<int>& perm) {
    std::vector<int> display(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) display[j] = original[static_cast<std::size_t>(perm[j])];
    return display;
}

std::string code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return {};
}

}  // namespace

TEST(Deblind, WorkedExample) {
    // Display shows (c3, c1, c2) and the annotator ranks them 2, 1, 3.
    EXPECT_EQ(deblind({2, 1, 3}, {2, 0, 1}), (std::vector<int>{1, 3, 2}));
}

TEST(Deblind, RandomPermutationProperty) {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(9));
        std::vector<int> perm(k), ranks(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::iota(ranks.begin(), ranks.end(), 1);
        for (int i = k; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        for (int i = k; i > 1; --i) std::swap(ranks[i - 1], ranks[rng.below(i)]);
        const auto original = deblind(ranks, perm);
        for (int i = 0; i < k; ++i) {
            const auto j = std::find(perm.begin(), perm.end(), i) - perm.begin();
            ASSERT_EQ(original[i], ranks[j]) << "trial " << trial;
        }
        ASSERT_EQ(blind(original, perm), ranks);
        ASSERT_NO_THROW(stats::validate_ranking(original));
    }
}

TEST(Deblind, RejectsNonPermutations) {
    EXPECT_EQ(code_of([] { deblind({1, 1, 2}, {0, 1, 2}); }), "not-a-permutation");
    EXPECT_EQ(code_of([] { deblind({1, 2}, {0, 1, 2}); }), "not-a-permutation");
}

TEST(DisplayPermutation, SeededAndValid) {
    const auto a = display_permutation("s1", "harbor", 5);
    EXPECT_EQ(a, display_permutation("s1", "harbor", 5));
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4}));
    std::set<std::vector<int>> seen;
    for (int i = 0; i < 20; ++i) seen.insert(display_permutation("s" + std::to_string(i), "harbor", 5));
    EXPECT_GT(seen.size(), 1u);
}

TEST(Rubric, ThreeCriteria) {
    const auto r = rubric();
    EXPECT_EQ(r.at("criteria").size(), 3u);
    EXPECT_FALSE(r.at("instruction").get<std::string>().empty());
}

TEST(Store, FullSessionExportsDeblindedRankings) {
    fixtures::TempDir dir;
    auto store = make_store(dir.path());
    const auto s = store.create_session("ann-1", 7);
    EXPECT_EQ(s.session_id, sha256_hex(std::string("toy|ann-1|7|0")).substr(0, 16));
    EXPECT_EQ(s.task_order.size(), 3u);

    const std::map<std::string, std::vector<int>> wanted{
        {"harbor", {1, 2, 3}}, {"runway", {2, 1, 3}}, {"farmland", {3, 1, 2}}};
    const auto p = pool();
    std::size_t done = 0;
    while (auto task = store.next_task(s.session_id)) {
        EXPECT_EQ(task->done, done);
        EXPECT_EQ(task->total, 3u);
        EXPECT_EQ(task->permutation, display_permutation(s.session_id, task->task_id, 3));
        const auto& inst = *std::find_if(p.begin(), p.end(), [&](const auto& x) { return x.image_id == task->task_id; });
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_EQ(task->texts[j], inst.candidates[static_cast<std::size_t>(task->permutation[j])].text);
        store.submit_ranking(s.session_id, task->task_id, blind(wanted.at(task->task_id), task->permutation));
        ++done;
    }
    EXPECT_EQ(done, 3u);
    const auto exported = store.export_preferences();
    ASSERT_EQ(exported.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(exported[i].image_id, s.task_order[i]);
        EXPECT_EQ(exported[i].ranking, wanted.at(exported[i].image_id));
        EXPECT_EQ(exported[i].candidates[0].model, "model-a");
        EXPECT_EQ(exported[i].extra.at("annotator"), "ann-1");
        EXPECT_FALSE(exported[i].extra.at("adjudicated").get<bool>());
    }
}

TEST(Store, ClientPayloadsCarryNoModelIdentity) {
    fixtures::TempDir dir;
    auto store = make_store(dir.path());
    const auto p = pool();
    std::set<std::string> models;
    for (const auto& inst : p)
        for (const auto& c : inst.candidates) models.insert(c.model);
    for (int a = 0; a < 5; ++a) {
        const auto s = store.create_session("ann-" + std::to_string(a), a);
        while (auto task = store.next_task(s.session_id)) {
            const std::string payload = task->client_json().dump();
            for (const auto& m : models) EXPECT_EQ(payload.find(m), std::string::npos) << payload;
            EXPECT_EQ(payload.find("permutation"), std::string::npos);
            EXPECT_EQ(payload.find("model"), std::string::npos);
            store.submit_ranking(s.session_id, task->task_id, {1, 2, 3});
        }
    }
}

TEST(Store, ErrorsAndAdjudication) {
    fixtures::TempDir dir;
    auto store = make_store(dir.path());
    const auto s = store.create_session("ann", 1);
    const auto task = *store.next_task(s.session_id);
    EXPECT_EQ(code_of([&] { store.submit_ranking("nope", task.task_id, {1, 2, 3}); }), "unknown-session");
    EXPECT_EQ(code_of([&] { store.submit_ranking(s.session_id, "atlantis", {1, 2, 3}); }), "unknown-task");
    EXPECT_EQ(code_of([&] { store.submit_ranking(s.session_id, task.task_id, {1, 1, 3}); }), "not-a-permutation");
    EXPECT_EQ(code_of([&] { store.adjudicate(s.session_id, task.task_id, {1, 2, 3}); }), "not-completed");
    EXPECT_EQ(code_of([&] { store.export_preferences(); }), "nothing-completed");
    store.submit_ranking(s.session_id, task.task_id, {1, 2, 3});
    EXPECT_EQ(code_of([&] { store.submit_ranking(s.session_id, task.task_id, {1, 2, 3}); }), "already-completed");

    store.adjudicate(s.session_id, task.task_id, {3, 2, 1}, "consensus");
    const auto exported = store.export_preferences();
    ASSERT_EQ(exported.size(), 1u);
    EXPECT_EQ(exported[0].ranking, deblind({3, 2, 1}, task.permutation));
    EXPECT_TRUE(exported[0].extra.at("adjudicated").get<bool>());
}

TEST(Store, EventLogReplayRestoresSessions) {
    fixtures::TempDir dir;
    std::string id;
    std::vector<stats::PreferenceInstance> before;
    {
        auto store = make_store(dir.path());
        id = store.create_session("ann", 3).session_id;
        store.create_session("other", 3);
        const auto t = *store.next_task(id);
        store.submit_ranking(id, t.task_id, {2, 3, 1});
        before = store.export_preferences({id});
    }
    auto reopened = make_store(dir.path());
    EXPECT_EQ(reopened.session_ids().size(), 2u);
    const auto s = reopened.session(id);
    EXPECT_EQ(s.completed.size(), 1u);
    EXPECT_EQ(s.to_json(), reopened.session(id).to_json());
    const auto after = reopened.export_preferences({id});
    ASSERT_EQ(after.size(), before.size());
    EXPECT_EQ(stats::to_json(after[0]), stats::to_json(before[0]));

    // apply_event over the raw log rebuilds the same state.
    AnnotationSession rebuilt;
    std::ifstream in(dir / "sessions" / (id + ".jsonl"));
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) apply_event(rebuilt, nlohmann::json::parse(line));
    EXPECT_EQ(rebuilt.to_json(), s.to_json());
}

TEST(Store, ShuffleDependsOnSeedOnly) {
    fixtures::TempDir d1, d2;
    auto a = make_store(d1.path());
    auto b = make_store(d2.path());
    EXPECT_EQ(a.create_session("x", 11).task_order, b.create_session("y", 11).task_order);
}

TEST(Store, ConstructionErrors) {
    fixtures::TempDir dir;
    EXPECT_EQ(code_of([&] { AnnotationStore(dir.path(), "d", {}); }), "empty-dataset");
    auto p = pool();
    p[0].candidates.resize(1);
    EXPECT_EQ(code_of([&] { AnnotationStore(dir.path(), "d", p); }), "nothing-to-rank");
    auto dup = pool();
    dup[1].image_id = dup[0].image_id;
    EXPECT_EQ(code_of([&] { AnnotationStore(dir.path(), "d", dup); }), "duplicate-id");
}

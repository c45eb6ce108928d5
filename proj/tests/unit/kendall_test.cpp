#include <gtest/gtest.h>

#include <map>

#include "oracles.hpp"
#include "random_sample.hpp"
#include "reconkit/error.hpp"
#include "reconkit/stats/kendall.hpp"

using namespace reconkit;
using namespace reconkit::stats;

namespace {

void expect_counts(const PairCounts& got, const oracle::Pairs& want) {
    EXPECT_EQ(got.concordant, want.c);
    EXPECT_EQ(got.discordant, want.d);
    EXPECT_EQ(got.ties_x, want.tx);
    EXPECT_EQ(got.ties_y, want.ty);
    EXPECT_EQ(got.ties_xy, want.txy);
    EXPECT_EQ(got.pairs, want.n0);
}

double sum_sq_groups(const PairedSample& s) {
    if (s.groups.empty()) return static_cast<double>(s.size()) * static_cast<double>(s.size());
    std::map<std::int64_t, double> sizes;
    for (auto g : s.groups) sizes[g] += 1;
    double out = 0;
    for (const auto& [_, n] : sizes) out += n * n;
    return out;
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

TEST(Kendall, CountsMatchPairEnumeration) {
    for (int seed = 0; seed < 300; ++seed) {
        const auto s = fixtures::random_sample(seed);
        expect_counts(count_pairs(s.x, s.y), oracle::pairs(s.x, s.y));
    }
}

TEST(Kendall, GroupedCountsMatchPairEnumeration) {
    for (int seed = 0; seed < 200; ++seed) {
        const auto s = fixtures::random_sample(seed + 1000, 120, true);
        expect_counts(count_pairs(s), oracle::pairs(s.x, s.y, s.groups));
    }
}

TEST(Kendall, ValuesMatchOracle) {
    for (int seed = 0; seed < 300; ++seed) {
        const bool grouped = seed % 3 == 0;
        const auto s = fixtures::random_sample(seed + 5000, 200, grouped);
        const auto p = oracle::pairs(s.x, s.y, s.groups);
        if (p.n0 == p.tx || p.n0 == p.ty) continue;
        const auto b = kendall_tau_b(s);
        EXPECT_NEAR(b.tau, oracle::tau_b(p), 1e-12) << "seed " << seed;
        EXPECT_EQ(b.concordant, p.c);
        EXPECT_EQ(b.discordant, p.d);
        const auto c = kendall_tau_c(s);
        EXPECT_NEAR(c.tau, oracle::tau_c(p, s.x, s.y, sum_sq_groups(s)), 1e-12) << "seed " << seed;
    }
}

TEST(Kendall, ConcordantAndReversedFixtures) {
    PairedSample up{{1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}, {}};
    EXPECT_EQ(kendall_tau_b(up).tau, 1.0);
    PairedSample down{{1, 2, 3, 4, 5}, {50, 40, 30, 20, 10}, {}};
    EXPECT_EQ(kendall_tau_b(down).tau, -1.0);
    // Square table without ties: tau_c = 2m(C-D)/(n^2(m-1)) = 2*5*10/(25*4) = 1.
    EXPECT_EQ(kendall_tau_c(up).tau, 1.0);
    EXPECT_EQ(kendall_tau_c(down).tau, -1.0);
}

TEST(Kendall, HandComputedTies) {
    // x = 1 1 2 3, y = 1 2 2 3. Pairs: (1,2) tx, (1,3) C, (1,4) C, (2,3) ty, (2,4) C, (3,4) C.
    PairedSample s{{1, 1, 2, 3}, {1, 2, 2, 3}, {}};
    const auto p = count_pairs(s);
    EXPECT_EQ(p.concordant, 4);
    EXPECT_EQ(p.discordant, 0);
    EXPECT_EQ(p.ties_x, 1);
    EXPECT_EQ(p.ties_y, 1);
    EXPECT_NEAR(kendall_tau_b(s).tau, 4.0 / 5.0, 1e-15);
    // m = 3: 2*3*4 / (16*2) = 0.75.
    EXPECT_NEAR(kendall_tau_c(s).tau, 0.75, 1e-15);
}

TEST(Kendall, AntisymmetricUnderNegation) {
    int checked = 0;
    for (int seed = 0; checked < 100; ++seed) {
        auto s = fixtures::random_sample(seed + 9000, 60);
        const auto p = oracle::pairs(s.x, s.y);
        if (p.n0 == p.tx || p.n0 == p.ty) continue;
        ASSERT_GT(p.tx + p.ty, 0);  // inputs are tied
        const double b = kendall_tau_b(s).tau, c = kendall_tau_c(s).tau;
        for (auto& v : s.y) v = -v;
        EXPECT_EQ(kendall_tau_b(s).tau, -b);
        EXPECT_EQ(kendall_tau_c(s).tau, -c);
        ++checked;
    }
}

TEST(Kendall, Errors) {
    EXPECT_EQ(code_of([] { kendall_tau_b(PairedSample{{1, 1, 1}, {1, 2, 3}, {}}); }), "zero-variance");
    EXPECT_EQ(code_of([] { kendall_tau_c(PairedSample{{1, 1, 1}, {1, 2, 3}, {}}); }), "zero-variance");
    EXPECT_EQ(code_of([] { kendall_tau_b(PairedSample{{1, 2}, {1}, {}}); }), "invalid-sample");
    EXPECT_EQ(code_of([] { kendall_tau_b(PairedSample{{1}, {1}, {}}); }), "invalid-sample");
}

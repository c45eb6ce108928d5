#include "reconkit/stats/kendall.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "reconkit/error.hpp"

namespace reconkit::stats {

namespace {

std::int64_t tied_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Number of pairs (i < j) with v[i] > v[j], via stable merge sort.
std::int64_t count_inversions(std::vector<double>& v) {
    std::vector<double> buffer(v.size());
    std::int64_t swaps = 0;
    for (std::size_t width = 1; width < v.size(); width *= 2) {
        for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, v.size());
            const std::size_t hi = std::min(lo + 2 * width, v.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    swaps += static_cast<std::int64_t>(mid - i);
                    buffer[k++] = v[j++];
                } else {
                    buffer[k++] = v[i++];
                }
            }
            while (i < mid) buffer[k++] = v[i++];
            while (j < hi) buffer[k++] = v[j++];
        }
        std::swap(v, buffer);
    }
    return swaps;
}

void check_sample(const PairedSample& s) {
    if (s.x.size() != s.y.size())
        throw Error("invalid-sample", "x and y differ in length");
    if (!s.groups.empty() && s.groups.size() != s.x.size())
        throw Error("invalid-sample", "group labels differ in length from x");
    if (s.x.size() < 2) throw Error("invalid-sample", "need at least two observations");
}

// Indices of s partitioned by group label, in label order.
std::vector<std::vector<std::size_t>> partition(const PairedSample& s) {
    if (s.groups.empty()) {
        std::vector<std::size_t> all(s.size());
        std::iota(all.begin(), all.end(), 0);
        return {all};
    }
    std::map<std::int64_t, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < s.size(); ++i) by_label[s.groups[i]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [label, idx] : by_label) out.push_back(std::move(idx));
    return out;
}

PairCounts& accumulate(PairCounts& acc, const PairCounts& c) {
    acc.concordant += c.concordant;
    acc.discordant += c.discordant;
    acc.ties_x += c.ties_x;
    acc.ties_y += c.ties_y;
    acc.ties_xy += c.ties_xy;
    acc.pairs += c.pairs;
    return acc;
}

TauResult make_result(const PairCounts& c, double tau, std::size_t n) {
    return {tau, c.concordant, c.discordant, c.ties_x, c.ties_y, static_cast<std::int64_t>(n)};
}

}  // namespace

PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("invalid-sample", "x and y differ in length");
    const std::size_t n = x.size();
    PairCounts c;
    c.pairs = tied_pairs(static_cast<std::int64_t>(n));
    if (n < 2) return c;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    std::int64_t run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
        const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
        if (same_x) {
            ++run_x;
        } else {
            c.ties_x += tied_pairs(run_x);
            run_x = 1;
        }
        if (same_xy) {
            ++run_xy;
        } else {
            c.ties_xy += tied_pairs(run_xy);
            run_xy = 1;
        }
    }

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    // Sorted by (x, y): pairs tied in x are already in y order, so every
    // inversion is a strictly discordant pair.
    c.discordant = count_inversions(ys);

    std::int64_t run_y = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && ys[i] == ys[i - 1]) {
            ++run_y;
        } else {
            c.ties_y += tied_pairs(run_y);
            run_y = 1;
        }
    }
    c.concordant = c.pairs - c.ties_x - c.ties_y + c.ties_xy - c.discordant;
    return c;
}

PairCounts count_pairs(const PairedSample& s) {
    check_sample(s);
    PairCounts total;
    for (const auto& idx : partition(s)) {
        std::vector<double> gx, gy;
        gx.reserve(idx.size());
        gy.reserve(idx.size());
        for (std::size_t i : idx) {
            gx.push_back(s.x[i]);
            gy.push_back(s.y[i]);
        }
        accumulate(total, count_pairs(gx, gy));
    }
    return total;
}

TauResult kendall_tau_b(const PairedSample& s) {
    const PairCounts c = count_pairs(s);
    const auto vx = static_cast<double>(c.pairs - c.ties_x);
    const auto vy = static_cast<double>(c.pairs - c.ties_y);
    if (vx <= 0.0 || vy <= 0.0)
        throw Error("zero-variance", vx <= 0.0 ? "all x values tied" : "all y values tied");
    const double tau = static_cast<double>(c.concordant - c.discordant) / std::sqrt(vx * vy);
    return make_result(c, tau, s.size());
}

TauResult kendall_tau_c(const PairedSample& s) {
    const PairCounts c = count_pairs(s);
    const std::size_t distinct_x = std::set<double>(s.x.begin(), s.x.end()).size();
    const std::size_t distinct_y = std::set<double>(s.y.begin(), s.y.end()).size();
    const auto m = static_cast<double>(std::min(distinct_x, distinct_y));
    if (m < 2.0) throw Error("zero-variance", "fewer than two distinct values");
    double n2 = 0.0;
    for (const auto& idx : partition(s)) n2 += static_cast<double>(idx.size()) * static_cast<double>(idx.size());
    const double tau = 2.0 * m * static_cast<double>(c.concordant - c.discordant) / (n2 * (m - 1.0));
    return make_result(c, tau, s.size());
}

}  // namespace reconkit::stats

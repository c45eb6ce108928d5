#pragma once

#include <cstdint>
#include <vector>

namespace reconkit::stats {

/// Paired observations: x = metric scores, y = human judgments (larger is
/// better). The optional group labels restrict pair counting to pairs that
/// share a label.
struct PairedSample {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<std::int64_t> groups;

    std::size_t size() const noexcept { return x.size(); }
};

/// Pair counts behind a Kendall statistic. ties_x and ties_y count pairs tied
/// in that variable (including joint ties, which are also in ties_xy).
struct PairCounts {
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    std::int64_t ties_x = 0;
    std::int64_t ties_y = 0;
    std::int64_t ties_xy = 0;
    std::int64_t pairs = 0;

    friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct TauResult {
    double tau = 0.0;
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    std::int64_t ties_x = 0;
    std::int64_t ties_y = 0;
    std::int64_t n = 0;
};

/// O(n log n) pair classification (sort plus merge-count of inversions).
/// Ignores groups.
PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y);

/// Pair counts summed over the groups of s (or over the whole sample when
/// s.groups is empty).
PairCounts count_pairs(const PairedSample& s);

/// tau_b = (C - D) / sqrt((n0 - Tx)(n0 - Ty)). Throws "zero-variance" when
/// every usable pair is tied in x or in y, "invalid-sample" on size mismatch
/// or fewer than two observations.
TauResult kendall_tau_b(const PairedSample& s);

/// tau_c = 2m(C - D) / (n^2 (m - 1)), m = min(#distinct x, #distinct y).
/// With groups, n^2 becomes the sum of squared group sizes. Throws
/// "zero-variance" when m < 2.
TauResult kendall_tau_c(const PairedSample& s);

}  // namespace reconkit::stats

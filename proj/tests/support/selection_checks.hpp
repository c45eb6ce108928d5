#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reconkit/describer/describer.hpp"

namespace fixtures {

/// Empty when `sel` is the first maximum of its scores with a correct tie
/// flag; otherwise a description of the first violation.
inline std::string selection_violation(const reconkit::describer::SelectionResult& sel,
                                       const reconkit::describer::CandidateSet& set) {
    std::optional<double> max;
    int first = 0, count = 0;
    for (std::size_t i = 0; i < sel.scores.size(); ++i) {
        if (!sel.scores[i]) continue;
        const double v = *sel.scores[i];
        if (!max || v > *max) {
            max = v;
            first = static_cast<int>(i) + 1;
            count = 1;
        } else if (v == *max) {
            ++count;
        }
    }
    if (!max) return "no scores";
    if (sel.best_index != first) return "best_index " + std::to_string(sel.best_index) + " != " + std::to_string(first);
    if (sel.best_score != *max) return "best_score is not the maximum";
    if (sel.tie_broken != (count >= 2)) return "tie_broken flag wrong";
    if (sel.best_caption != set.candidates[static_cast<std::size_t>(first - 1)].text) return "best_caption mismatch";
    return {};
}

}  // namespace fixtures

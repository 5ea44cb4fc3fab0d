#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace fdnn {

/// k disjoint folds covering 0..n-1; sizes differ by at most one.
struct FoldPlan {
    std::vector<std::vector<std::size_t>> folds;
    std::uint64_t seed = 0;

    std::size_t count() const noexcept { return folds.size(); }
    std::size_t sample_count() const;
    /// Indices outside fold f, ascending.
    std::vector<std::size_t> training_indices(std::size_t f) const;
    const std::vector<std::size_t>& validation_indices(std::size_t f) const { return folds.at(f); }
};

/// Seeded shuffle then contiguous chunks; each fold is sorted.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct GridOutcome {
    std::size_t best = 0;             ///< winning cell index
    std::vector<double> cell_scores;  ///< mean CV score per cell
};

/// Evaluates score(cell) for every cell (concurrently when threads > 1) and
/// returns the minimum. Cells must be enumerated in lexicographic order of
/// their hyperparameters so that ties resolve to the smaller tuple.
GridOutcome grid_search(std::size_t cells, const std::function<double(std::size_t)>& score, unsigned threads = 1);

/// Index of the smallest value; ties to the lowest index. NaN never wins.
std::size_t argmin_first(const std::vector<double>& values);

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

}  // namespace fdnn

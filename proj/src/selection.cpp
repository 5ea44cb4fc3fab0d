#include "fdnn/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fdnn/errors.hpp"
#include "fdnn/parallel.hpp"
#include "fdnn/random.hpp"

namespace fdnn {

std::size_t FoldPlan::sample_count() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.size();
    return n;
}

std::vector<std::size_t> FoldPlan::training_indices(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    std::sort(out.begin(), out.end());
    return out;
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw ArgumentError("fold count must be positive");
    if (k > n) throw ArgumentError("more folds (" + std::to_string(k) + ") than samples (" + std::to_string(n) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    FoldPlan plan;
    plan.seed = seed;
    plan.folds.resize(k);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        plan.folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                             order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        std::sort(plan.folds[f].begin(), plan.folds[f].end());
        pos += len;
    }
    return plan;
}

std::size_t argmin_first(const std::vector<double>& values) {
    if (values.empty()) throw ArgumentError("argmin of an empty list");
    std::size_t best = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) continue;
        if (best == values.size() || values[i] < values[best]) best = i;
    }
    if (best == values.size()) throw SelectionError("every grid cell failed");
    return best;
}

GridOutcome grid_search(std::size_t cells, const std::function<double(std::size_t)>& score, unsigned threads) {
    if (cells == 0) throw ArgumentError("empty hyperparameter grid");
    GridOutcome out;
    out.cell_scores.assign(cells, std::numeric_limits<double>::quiet_NaN());
    parallel_for(cells, threads, [&](std::size_t c) { out.cell_scores[c] = score(c); });
    out.best = argmin_first(out.cell_scores);
    return out;
}

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size() || actual.empty()) throw ArgumentError("rmse needs equal non-empty inputs");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    return std::sqrt(s / static_cast<double>(actual.size()));
}

}  // namespace fdnn

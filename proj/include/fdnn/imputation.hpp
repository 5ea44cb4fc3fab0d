#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "fdnn/fdata.hpp"

namespace fdnn {

/// Values on a common grid with the set nm(x) of observed indices.
struct MaskedVector {
    Eigen::VectorXd values;     ///< entries outside the mask are meaningless
    std::vector<char> observed; ///< observed[j] != 0 iff j is in nm(x)

    MaskedVector(Eigen::VectorXd values, std::vector<char> observed);
    Eigen::Index size() const noexcept { return values.size(); }
    std::size_t observed_count() const;
    bool complete() const;
};

/// Places every function's samples on `grid` (exact abscissa match); grid
/// points without a sample become missing.
std::vector<MaskedVector> to_masked(const Dataset& data, std::span<const double> grid);

/// Column means over observed entries; throws ImputationError if a column is
/// never observed.
Eigen::VectorXd observed_column_means(std::span<const MaskedVector> data);

/// Fills missing entries with the given column means.
Eigen::VectorXd fill_with(const MaskedVector& x, const Eigen::VectorXd& column_values);

/// Missing entries replaced by the column mean of the observed values.
Eigen::MatrixXd mean_impute(std::span<const MaskedVector> data);

/// (1/|nm(x) & nm(y)|) sum over shared indices of (x_j - y_j)^2; NaN when no
/// index is shared.
double missing_aware_distance(const MaskedVector& a, const MaskedVector& b);

struct KnnImputation {
    Eigen::VectorXd values;
    std::vector<std::string> warnings;
};

/// Fills x's missing entries with the mean, over the k nearest donors that
/// observe the coordinate, of the donors' values. `skip` (if valid) excludes
/// one donor, typically x itself. Distance ties go to the lower donor index.
KnnImputation knn_impute_one(const MaskedVector& x, std::span<const MaskedVector> donors, int k,
                             std::size_t skip = static_cast<std::size_t>(-1));

/// knn_impute_one for every sample, with the other samples as donors.
Eigen::MatrixXd knn_impute(std::span<const MaskedVector> data, int k, std::vector<std::string>* warnings = nullptr);

/// Observed entries replaced by (x_i - mean) / sqrt(sum of squared deviations),
/// both over nm(x); the mask is unchanged.
MaskedVector expert_scale(const MaskedVector& x);

}  // namespace fdnn

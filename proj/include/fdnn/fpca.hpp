#pragma once

#include <Eigen/Dense>

#include <optional>

#include "fdnn/represent.hpp"

namespace fdnn {

struct PcaOptions {
    /// Scale every column to unit variance before the decomposition
    /// (classical PCA on raw vectors). Functional PCA keeps this off.
    bool standardize = false;
};

/// PCA of coordinate vectors. On scaled coordinates beta this is functional
/// PCA: components are the beta images of the principal functions.
///
/// Variances use the 1/n normalization, so eigenvalues sum to the mean
/// squared distance to the mean and whitened scores have unit 1/n variance.
class FpcaModel {
public:
    FpcaModel(Eigen::VectorXd mean, Eigen::VectorXd column_scale, Eigen::MatrixXd components,
              Eigen::VectorXd eigenvalues, double total_variance, BasisPtr basis);

    int input_dimension() const noexcept { return static_cast<int>(mean_.size()); }
    int component_count() const noexcept { return static_cast<int>(components_.cols()); }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    /// Column standard deviations used for standardization (ones otherwise).
    const Eigen::VectorXd& column_scale() const noexcept { return column_scale_; }
    /// Unit-norm principal vectors, one per column, by decreasing eigenvalue.
    const Eigen::MatrixXd& components() const noexcept { return components_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    double total_variance() const noexcept { return total_variance_; }
    Eigen::VectorXd explained_variance_ratio() const;

    /// tau_j^T (x - mean) for the first `count` components (all when
    /// count < 0), divided by sqrt(eigenvalue_j) when whitening.
    Eigen::VectorXd scores(const Eigen::VectorXd& x, bool whiten = false, int count = -1) const;
    /// scores() applied to every row.
    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows, bool whiten = false, int count = -1) const;

    /// Unwhitened scores back to the input space.
    Eigen::VectorXd reconstruct(const Eigen::VectorXd& scores) const;

    /// Principal function j (0-based): alpha = U^{-1} tau_j. Needs a model
    /// fitted on beta coordinates of a basis.
    Representation principal_function(int j) const;

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd column_scale_;
    Eigen::MatrixXd components_;
    Eigen::VectorXd eigenvalues_;
    double total_variance_;
    BasisPtr basis_;
};

/// Fits `components` principal vectors (all when < 0) to the rows.
/// Signs are fixed so the largest-magnitude entry of each vector is positive.
FpcaModel fit_fpca(const Eigen::MatrixXd& rows, int components = -1, const PcaOptions& options = {},
                   BasisPtr basis = nullptr);

/// Stacks the beta coordinates of representations into rows.
Eigen::MatrixXd beta_matrix(std::span<const Representation> reps);

}  // namespace fdnn

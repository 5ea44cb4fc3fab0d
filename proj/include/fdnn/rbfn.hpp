#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fdnn/transforms.hpp"

namespace fdnn {

/// Gaussian RBF network y = sum_i w_i exp(-d(x, c_i)^2 / (2 width^2)) over
/// coordinate vectors. Inputs are metric images (beta of the function or of
/// its derivative), so d is the Euclidean distance between them. No bias.
class RbfnModel {
public:
    RbfnModel(Eigen::MatrixXd centers, Eigen::VectorXd weights, double width, double ridge,
              SemiMetricSpec metric = {});

    Eigen::Index center_count() const noexcept { return centers_.rows(); }
    Eigen::Index input_dimension() const noexcept { return centers_.cols(); }
    const Eigen::MatrixXd& centers() const noexcept { return centers_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    double width() const noexcept { return width_; }
    double ridge() const noexcept { return ridge_; }
    const SemiMetricSpec& metric() const noexcept { return metric_; }

    double predict(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& rows) const;

private:
    Eigen::MatrixXd centers_;
    Eigen::VectorXd weights_;
    double width_;
    double ridge_;
    SemiMetricSpec metric_;
};

/// Gaussian design matrix exp(-||a_i - b_j||^2 / (2 width^2)).
Eigen::MatrixXd gaussian_design(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double width);

/// Median of the pairwise Euclidean distances between rows.
double median_pairwise_distance(const Eigen::MatrixXd& rows);

/// Result of regularized orthogonal least squares forward selection. Every
/// prefix of the selection is a model; `model(k)` rebuilds the k-center one.
class OlsPath {
public:
    std::size_t size() const noexcept { return selected.size(); }
    RbfnModel model(std::size_t k) const;
    /// Output weights of the k-center prefix model.
    Eigen::VectorXd weights(std::size_t k) const;

    std::vector<Eigen::Index> selected;     ///< training rows chosen as centers, in order
    std::vector<double> regularized_error;  ///< ||e||^2 + ridge ||g||^2 after each step
    Eigen::VectorXd orthogonal_weights;     ///< g
    Eigen::MatrixXd triangular;             ///< unit upper triangular A with A theta = g
    Eigen::MatrixXd inputs;                 ///< training inputs (candidates)
    double width = 1.0;
    double ridge = 0.0;
    SemiMetricSpec metric;
    std::vector<std::string> warnings;
};

/// Greedy selection among the training inputs: each step appends the
/// candidate whose orthogonalized column w maximizes (w^T y)^2 / (w^T w +
/// ridge). Ties within 1e-12 (relative to y^T y) go to the lower index.
/// Candidates whose orthogonalized energy falls below 1e-12 of their original
/// energy are skipped; the path stops early when none remain.
OlsPath train_ols(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, double width, double ridge,
                  std::size_t max_centers = 100, SemiMetricSpec metric = {});

struct FoldPlan;

struct CenterSelection {
    std::size_t chosen = 0;
    std::vector<double> cv_error;  ///< mean over folds of SSE / fold size, index k-1
};

/// Center count minimizing the cross-validated error of path prefixes; one
/// path is trained per fold. Ties go to fewer centers.
CenterSelection select_centers(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, double width,
                               double ridge, std::size_t max_centers, const FoldPlan& folds);

/// Validation SSE of every prefix of `path` on (inputs, targets); element k-1
/// for k centers. Prefixes longer than the path reuse the full path.
std::vector<double> path_validation_sse(const OlsPath& path, const Eigen::MatrixXd& inputs,
                                        const Eigen::VectorXd& targets, std::size_t max_centers);

}  // namespace fdnn

#include "fdnn/rbfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdnn/errors.hpp"
#include "fdnn/selection.hpp"

namespace fdnn {

RbfnModel::RbfnModel(Eigen::MatrixXd centers, Eigen::VectorXd weights, double width, double ridge,
                     SemiMetricSpec metric)
    : centers_(std::move(centers)), weights_(std::move(weights)), width_(width), ridge_(ridge), metric_(metric) {
    if (centers_.rows() != weights_.size()) throw ContractError("one weight per center is required");
    if (!(width_ > 0.0)) throw ArgumentError("RBF width must be positive");
    if (!(ridge_ >= 0.0)) throw ArgumentError("ridge must be non-negative");
}

double RbfnModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != centers_.cols()) throw ContractError("input dimension does not match the centers");
    const double denom = 2.0 * width_ * width_;
    double y = 0.0;
    for (Eigen::Index i = 0; i < centers_.rows(); ++i)
        y += weights_[i] * std::exp(-(centers_.row(i).transpose() - x).squaredNorm() / denom);
    return y;
}

Eigen::VectorXd RbfnModel::predict(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != centers_.cols()) throw ContractError("input dimension does not match the centers");
    if (centers_.rows() == 0) return Eigen::VectorXd::Zero(rows.rows());
    return gaussian_design(rows, centers_, width_) * weights_;
}

Eigen::MatrixXd gaussian_design(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double width) {
    if (a.cols() != b.cols()) throw ContractError("input dimension does not match the centers");
    const double denom = 2.0 * width * width;
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() / denom);
    return out;
}

double median_pairwise_distance(const Eigen::MatrixXd& rows) {
    const Eigen::Index n = rows.rows();
    if (n < 2) throw ArgumentError("median distance needs at least two rows");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((rows.row(i) - rows.row(j)).norm());
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double m = *mid;
    if (d.size() % 2 == 0) m = 0.5 * (m + *std::max_element(d.begin(), mid));
    return m;
}

Eigen::VectorXd OlsPath::weights(std::size_t k) const {
    if (k > size()) throw ArgumentError("path has only " + std::to_string(size()) + " centers");
    const auto kk = static_cast<Eigen::Index>(k);
    if (k == 0) return {};
    return triangular.topLeftCorner(kk, kk).triangularView<Eigen::UnitUpper>().solve(orthogonal_weights.head(kk));
}

RbfnModel OlsPath::model(std::size_t k) const {
    const Eigen::VectorXd theta = weights(k);
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), inputs.cols());
    for (std::size_t i = 0; i < k; ++i) centers.row(static_cast<Eigen::Index>(i)) = inputs.row(selected[i]);
    return RbfnModel(std::move(centers), theta, width, ridge, metric);
}

OlsPath train_ols(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, double width, double ridge,
                  std::size_t max_centers, SemiMetricSpec metric) {
    const Eigen::Index n = inputs.rows();
    if (targets.size() != n) throw ContractError("one target per input row is required");
    if (max_centers > static_cast<std::size_t>(n)) throw ArgumentError("more centers requested than training samples");
    if (!(width > 0.0)) throw ArgumentError("RBF width must be positive");
    if (!(ridge >= 0.0)) throw ArgumentError("ridge must be non-negative");

    OlsPath path;
    path.inputs = inputs;
    path.width = width;
    path.ridge = ridge;
    path.metric = metric;
    const auto cap = static_cast<Eigen::Index>(max_centers);
    path.orthogonal_weights = Eigen::VectorXd::Zero(cap);
    path.triangular = Eigen::MatrixXd::Identity(cap, cap);

    // Columns are orthogonalized in place against every selected column
    // (modified Gram-Schmidt); coef(i, j) keeps the projection coefficient of
    // candidate j on the i-th selected column.
    Eigen::MatrixXd w = gaussian_design(inputs, inputs, width);
    const Eigen::VectorXd energy0 = w.colwise().squaredNorm().transpose();
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(cap, n);
    std::vector<char> available(static_cast<std::size_t>(n), 1);
    const double yy = targets.squaredNorm();
    const double tie = 1e-12 * std::max(yy, std::numeric_limits<double>::min());
    double error = yy;

    for (Eigen::Index k = 0; k < cap; ++k) {
        Eigen::Index best = -1;
        double best_gain = -1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!available[static_cast<std::size_t>(j)]) continue;
            const double e = w.col(j).squaredNorm();
            if (!(e >= 1e-12 * energy0[j])) {
                available[static_cast<std::size_t>(j)] = 0;
                continue;
            }
            const double wy = w.col(j).dot(targets);
            const double gain = wy * wy / (e + ridge);
            if (best < 0 || gain > best_gain + tie) {
                best = j;
                best_gain = gain;
            }
        }
        if (best < 0) {
            path.warnings.push_back("forward selection stopped after " + std::to_string(k) +
                                    " centers: no candidate with non-negligible energy remains");
            break;
        }
        available[static_cast<std::size_t>(best)] = 0;
        const Eigen::VectorXd wk = w.col(best);
        const double ek = wk.squaredNorm();
        path.orthogonal_weights[k] = wk.dot(targets) / (ek + ridge);
        for (Eigen::Index i = 0; i < k; ++i) path.triangular(i, k) = coef(i, best);
        path.selected.push_back(best);
        error -= best_gain;
        path.regularized_error.push_back(std::max(error, 0.0));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!available[static_cast<std::size_t>(j)]) continue;
            const double a = wk.dot(w.col(j)) / ek;
            coef(k, j) = a;
            w.col(j) -= a * wk;
        }
    }
    const auto m = static_cast<Eigen::Index>(path.selected.size());
    path.orthogonal_weights.conservativeResize(m);
    path.triangular.conservativeResize(m, m);
    return path;
}

std::vector<double> path_validation_sse(const OlsPath& path, const Eigen::MatrixXd& inputs,
                                        const Eigen::VectorXd& targets, std::size_t max_centers) {
    const std::size_t len = path.size();
    std::vector<double> sse(max_centers, 0.0);
    if (len == 0) {
        std::fill(sse.begin(), sse.end(), targets.squaredNorm());
        return sse;
    }
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(len), path.inputs.cols());
    for (std::size_t i = 0; i < len; ++i) centers.row(static_cast<Eigen::Index>(i)) = path.inputs.row(path.selected[i]);
    const Eigen::MatrixXd design = gaussian_design(inputs, centers, path.width);
    for (std::size_t k = 1; k <= max_centers; ++k) {
        const std::size_t kk = std::min(k, len);
        const Eigen::VectorXd theta = path.weights(kk);
        sse[k - 1] = (design.leftCols(static_cast<Eigen::Index>(kk)) * theta - targets).squaredNorm();
    }
    return sse;
}

CenterSelection select_centers(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, double width,
                               double ridge, std::size_t max_centers, const FoldPlan& folds) {
    if (folds.sample_count() != static_cast<std::size_t>(inputs.rows()))
        throw ContractError("fold plan does not cover the training set");
    CenterSelection sel;
    sel.cv_error.assign(max_centers, 0.0);
    for (std::size_t f = 0; f < folds.count(); ++f) {
        const auto tr = folds.training_indices(f);
        const auto& va = folds.validation_indices(f);
        Eigen::MatrixXd xt(static_cast<Eigen::Index>(tr.size()), inputs.cols());
        Eigen::VectorXd yt(static_cast<Eigen::Index>(tr.size()));
        for (std::size_t i = 0; i < tr.size(); ++i) {
            xt.row(static_cast<Eigen::Index>(i)) = inputs.row(static_cast<Eigen::Index>(tr[i]));
            yt[static_cast<Eigen::Index>(i)] = targets[static_cast<Eigen::Index>(tr[i])];
        }
        Eigen::MatrixXd xv(static_cast<Eigen::Index>(va.size()), inputs.cols());
        Eigen::VectorXd yv(static_cast<Eigen::Index>(va.size()));
        for (std::size_t i = 0; i < va.size(); ++i) {
            xv.row(static_cast<Eigen::Index>(i)) = inputs.row(static_cast<Eigen::Index>(va[i]));
            yv[static_cast<Eigen::Index>(i)] = targets[static_cast<Eigen::Index>(va[i])];
        }
        const OlsPath path = train_ols(xt, yt, width, ridge, std::min(max_centers, tr.size()));
        const auto sse = path_validation_sse(path, xv, yv, max_centers);
        for (std::size_t k = 0; k < max_centers; ++k)
            sel.cv_error[k] += sse[k] / static_cast<double>(va.size()) / static_cast<double>(folds.count());
    }
    sel.chosen = argmin_first(sel.cv_error) + 1;
    return sel;
}

}  // namespace fdnn

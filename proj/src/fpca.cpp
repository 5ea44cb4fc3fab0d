#include "fdnn/fpca.hpp"

#include <cmath>

#include "fdnn/errors.hpp"

namespace fdnn {

FpcaModel::FpcaModel(Eigen::VectorXd mean, Eigen::VectorXd column_scale, Eigen::MatrixXd components,
                     Eigen::VectorXd eigenvalues, double total_variance, BasisPtr basis)
    : mean_(std::move(mean)),
      column_scale_(std::move(column_scale)),
      components_(std::move(components)),
      eigenvalues_(std::move(eigenvalues)),
      total_variance_(total_variance),
      basis_(std::move(basis)) {}

Eigen::VectorXd FpcaModel::explained_variance_ratio() const {
    if (!(total_variance_ > 0.0)) return Eigen::VectorXd::Zero(eigenvalues_.size());
    return eigenvalues_ / total_variance_;
}

Eigen::VectorXd FpcaModel::scores(const Eigen::VectorXd& x, bool whiten, int count) const {
    if (x.size() != mean_.size()) throw ContractError("PCA input dimension mismatch");
    const int k = count < 0 ? component_count() : count;
    if (k > component_count()) throw ArgumentError("more scores requested than fitted components");
    const Eigen::VectorXd centered = (x - mean_).cwiseQuotient(column_scale_);
    Eigen::VectorXd s = components_.leftCols(k).transpose() * centered;
    if (whiten) {
        for (int j = 0; j < k; ++j) {
            if (!(eigenvalues_[j] >= 1e-12))
                throw DegenerateComponentError("cannot whiten component " + std::to_string(j) +
                                               " with variance " + std::to_string(eigenvalues_[j]));
            s[j] /= std::sqrt(eigenvalues_[j]);
        }
    }
    return s;
}

Eigen::MatrixXd FpcaModel::transform(const Eigen::MatrixXd& rows, bool whiten, int count) const {
    const int k = count < 0 ? component_count() : count;
    Eigen::MatrixXd out(rows.rows(), k);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out.row(i) = scores(rows.row(i).transpose(), whiten, k).transpose();
    return out;
}

Eigen::VectorXd FpcaModel::reconstruct(const Eigen::VectorXd& s) const {
    if (s.size() > component_count()) throw ArgumentError("too many scores");
    return mean_ + (components_.leftCols(s.size()) * s).cwiseProduct(column_scale_);
}

Representation FpcaModel::principal_function(int j) const {
    if (!basis_) throw ContractError("principal functions need a model fitted on basis coordinates");
    if (j < 0 || j >= component_count()) throw ArgumentError("component index out of range");
    return Representation::from_beta(basis_, components_.col(j));
}

FpcaModel fit_fpca(const Eigen::MatrixXd& rows, int components, const PcaOptions& options, BasisPtr basis) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index p = rows.cols();
    if (n < 2) throw ArgumentError("PCA needs at least two samples");
    const Eigen::Index k = components < 0 ? std::min(n, p) : components;
    if (k > p) throw ArgumentError("more components requested than input dimensions");
    if (k > n) throw RankDeficiencyError("fewer samples than requested components");
    if (basis && basis->dimension() != p) throw ContractError("basis size does not match coordinate dimension");

    Eigen::VectorXd mean = rows.colwise().mean().transpose();
    Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
    if (options.standardize) {
        scale = (centered.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
        for (Eigen::Index c = 0; c < p; ++c)
            if (!(scale[c] > 0.0)) scale[c] = 1.0;
        centered = centered.array().rowwise() / scale.transpose().array();
    }
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");

    // Eigen returns ascending order.
    Eigen::MatrixXd vecs(p, k);
    Eigen::VectorXd vals(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        vecs.col(j) = eig.eigenvectors().col(p - 1 - j);
        vals[j] = std::max(eig.eigenvalues()[p - 1 - j], 0.0);
        Eigen::Index arg;
        vecs.col(j).cwiseAbs().maxCoeff(&arg);
        if (vecs(arg, j) < 0.0) vecs.col(j) = -vecs.col(j);
    }
    const double total = cov.trace();
    return FpcaModel(std::move(mean), std::move(scale), std::move(vecs), std::move(vals), total, std::move(basis));
}

Eigen::MatrixXd beta_matrix(std::span<const Representation> reps) {
    if (reps.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(reps.size()), reps.front().dimension());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (reps[i].dimension() != m.cols()) throw ContractError("representations of different sizes");
        m.row(static_cast<Eigen::Index>(i)) = reps[i].beta().transpose();
    }
    return m;
}

}  // namespace fdnn

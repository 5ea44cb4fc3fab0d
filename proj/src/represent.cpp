#include "fdnn/represent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/parallel.hpp"

namespace fdnn {

Representation::Representation(BasisPtr basis, Eigen::VectorXd alpha, double sse)
    : basis_(std::move(basis)), alpha_(std::move(alpha)), sse_(sse) {
    if (!basis_) throw ContractError("representation without basis");
    if (alpha_.size() != basis_->dimension()) throw ContractError("coordinate count does not match basis size");
    beta_ = basis_->gram().chol.triangularView<Eigen::Upper>() * alpha_;
}

Representation Representation::from_beta(BasisPtr basis, const Eigen::VectorXd& beta) {
    if (!basis || beta.size() != basis->dimension()) throw ContractError("coordinate count does not match basis size");
    Eigen::VectorXd alpha = basis->gram().chol.triangularView<Eigen::Upper>().solve(beta);
    return Representation(std::move(basis), std::move(alpha));
}

double Representation::operator()(double x) const { return basis_->spec().evaluate(x).dot(alpha_); }

Eigen::VectorXd Representation::evaluate(std::span<const double> xs) const {
    return basis_->spec().design(xs) * alpha_;
}

namespace {

struct LeastSquares {
    Eigen::VectorXd alpha;
    Eigen::VectorXd residual;
    Eigen::VectorXd hat;
};

std::string format_indices(const std::vector<int>& idx) {
    std::ostringstream s;
    for (std::size_t i = 0; i < idx.size(); ++i) s << (i ? ", " : "") << idx[i];
    return s.str();
}

LeastSquares solve_least_squares(const SampledFunction& f, const BasisSpec& basis, const FitOptions& options,
                                 bool want_hat) {
    const auto xs = f.xs();
    const auto ys = f.ys();
    const Eigen::MatrixXd a = basis.design(xs);
    const Eigen::Index m = a.rows();
    const Eigen::Index q = a.cols();
    const std::string who = "function " + std::to_string(f.id());

    std::vector<int> empty;
    for (Eigen::Index k = 0; k < q; ++k)
        if (a.col(k).cwiseAbs().maxCoeff() == 0.0) empty.push_back(static_cast<int>(k));
    if (!empty.empty())
        throw UnidentifiableError(who + ": no samples in the support of basis functions " + format_indices(empty));
    if (m < q)
        throw UnidentifiableError(who + ": " + std::to_string(m) + " samples cannot identify " + std::to_string(q) +
                                  " coefficients");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv[0];
    const double smin = sv[q - 1];
    if (!(smin > 0.0) || smax / smin > options.max_condition) {
        const Eigen::VectorXd v = svd.matrixV().col(q - 1).cwiseAbs();
        std::vector<int> weak;
        for (Eigen::Index k = 0; k < q; ++k)
            if (v[k] >= 0.1 * v.maxCoeff()) weak.push_back(static_cast<int>(k));
        std::ostringstream msg;
        msg << who << ": coefficients " << format_indices(weak) << " are not identifiable (condition "
            << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) << ")";
        throw UnidentifiableError(msg.str());
    }

    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), m);
    Eigen::VectorXd qty = qr.householderQ().adjoint() * y;
    LeastSquares ls;
    ls.alpha = r.triangularView<Eigen::Upper>().solve(qty.head(q));
    ls.residual = y - a * ls.alpha;
    if (want_hat) {
        const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(m, q);
        ls.hat = thin_q.rowwise().squaredNorm();
    }
    return ls;
}

}  // namespace

Representation fit(const SampledFunction& f, const BasisPtr& basis, const FitOptions& options) {
    LeastSquares ls = solve_least_squares(f, basis->spec(), options, false);
    return Representation(basis, std::move(ls.alpha), ls.residual.squaredNorm());
}

Eigen::VectorXd hat_diagonal(const SampledFunction& f, const BasisSpec& basis, const FitOptions& options) {
    return solve_least_squares(f, basis, options, true).hat;
}

double loo_score(const SampledFunction& f, const BasisSpec& basis, const FitOptions& options) {
    const LeastSquares ls = solve_least_squares(f, basis, options, true);
    if (ls.hat.maxCoeff() >= 1.0 - 1e-12)
        throw DegenerateLooError("function " + std::to_string(f.id()) +
                                 ": the fit interpolates at least one sample, leave-one-out is undefined");
    const Eigen::ArrayXd scaled = ls.residual.array() / (1.0 - ls.hat.array());
    return scaled.square().mean();
}

BasisSpec make_basis_spec(BasisKind kind, Domain domain, int order, int size) {
    if (kind == BasisKind::Fourier) return BasisSpec::fourier(domain, size);
    if (size < order)
        throw ArgumentError("a B-spline basis of order " + std::to_string(order) + " has at least " +
                            std::to_string(order) + " functions");
    return BasisSpec::bspline(KnotVector::uniform(domain, size - order, order));
}

std::vector<int> default_candidate_sizes(BasisKind kind, int order, std::size_t min_length) {
    std::vector<int> sizes;
    const int m = static_cast<int>(min_length);
    if (kind == BasisKind::Fourier) {
        for (int q = 3; q <= std::min(m - 1, 61); q += 2) sizes.push_back(q);
        return sizes;
    }
    for (int l = 4; l <= std::min(m - order, 60); l += 2) sizes.push_back(l + order);
    return sizes;
}

BasisSelection select_basis_size(const Dataset& data, BasisKind kind, int order, std::span<const int> sizes,
                                 const FitOptions& options, unsigned threads) {
    if (sizes.empty()) throw SelectionError("no candidate basis sizes");
    BasisSelection sel;
    sel.candidates.resize(sizes.size());
    parallel_for(sizes.size(), threads, [&](std::size_t c) {
        CandidateScore& score = sel.candidates[c];
        score.size = sizes[c];
        std::optional<BasisSpec> spec;
        try {
            spec = make_basis_spec(kind, data.domain(), order, sizes[c]);
        } catch (const Error& e) {
            score.failures = data.size();
            score.reason = e.what();
            return;
        }
        double total = 0.0;
        for (const auto& f : data.functions()) {
            try {
                total += loo_score(f, *spec, options);
            } catch (const Error& e) {
                if (score.failures++ == 0) score.reason = e.what();
            }
        }
        score.feasible = score.failures == 0;
        score.total_loo = total;
    });
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : sel.candidates) {
        if (!c.feasible) continue;
        if (c.total_loo < best || (c.total_loo == best && c.size < sel.chosen)) {
            best = c.total_loo;
            sel.chosen = c.size;
        }
    }
    if (sel.chosen == 0) throw SelectionError("every candidate basis size is infeasible for some function");
    return sel;
}

const Eigen::VectorXd& to_beta(const Representation& r) { return r.beta(); }

void require_same_basis(const Representation& a, const Representation& b) {
    if (!a.basis()->same_as(*b.basis())) throw ContractError("representations live on different bases");
}

double inner(const Representation& a, const Representation& b) {
    require_same_basis(a, b);
    return a.beta().dot(b.beta());
}

double dist(const Representation& a, const Representation& b) {
    require_same_basis(a, b);
    return (a.beta() - b.beta()).norm();
}

}  // namespace fdnn

#include "fdnn/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdnn/errors.hpp"
#include "fdnn/quadrature.hpp"

namespace fdnn {

KnotVector::KnotVector(std::vector<double> breakpoints, int order)
    : breakpoints_(std::move(breakpoints)), order_(order) {
    if (order_ < 1) throw ArgumentError("spline order must be at least 1");
    if (breakpoints_.size() < 2) throw ArgumentError("a knot vector needs both boundary knots");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k)
        if (!(breakpoints_[k] > breakpoints_[k - 1]))
            throw ArgumentError("breakpoints must be strictly increasing");
}

KnotVector KnotVector::uniform(Domain domain, int interior_count, int order) {
    if (interior_count < 0) throw ArgumentError("interior knot count must be non-negative");
    if (!(domain.lo < domain.hi)) throw ArgumentError("empty domain");
    std::vector<double> t(static_cast<std::size_t>(interior_count) + 2);
    const double step = domain.volume() / (interior_count + 1);
    for (int k = 0; k <= interior_count + 1; ++k) t[static_cast<std::size_t>(k)] = domain.lo + k * step;
    t.back() = domain.hi;
    return KnotVector(std::move(t), order);
}

std::vector<double> KnotVector::augmented() const {
    std::vector<double> out;
    out.reserve(breakpoints_.size() + 2 * static_cast<std::size_t>(order_ - 1));
    out.insert(out.end(), static_cast<std::size_t>(order_ - 1), breakpoints_.front());
    out.insert(out.end(), breakpoints_.begin(), breakpoints_.end());
    out.insert(out.end(), static_cast<std::size_t>(order_ - 1), breakpoints_.back());
    return out;
}

BasisSpec::BasisSpec(BasisKind kind, Domain domain, int dimension, std::shared_ptr<const KnotVector> knots)
    : kind_(kind), domain_(domain), dimension_(dimension), knots_(std::move(knots)) {
    if (knots_) augmented_ = knots_->augmented();
}

BasisSpec BasisSpec::bspline(KnotVector knots) {
    const int q = knots.interior_count() + knots.order();
    const Domain d = knots.domain();
    return BasisSpec(BasisKind::BSpline, d, q, std::make_shared<const KnotVector>(std::move(knots)));
}

BasisSpec BasisSpec::fourier(Domain domain, int size) {
    if (size < 1) throw ArgumentError("Fourier basis needs at least one term");
    if (!(domain.lo < domain.hi)) throw ArgumentError("empty domain");
    return BasisSpec(BasisKind::Fourier, domain, size, nullptr);
}

const KnotVector& BasisSpec::knots() const {
    if (!knots_) throw ContractError("Fourier basis has no knots");
    return *knots_;
}

bool BasisSpec::operator==(const BasisSpec& other) const {
    if (kind_ != other.kind_ || dimension_ != other.dimension_ || !(domain_ == other.domain_)) return false;
    return kind_ == BasisKind::Fourier || *knots_ == *other.knots_;
}

int BasisSpec::evaluate_nonzero(double x, std::span<double> out) const {
    const int nu = knots_->order();
    const int q = dimension_;
    const auto& t = augmented_;
    // Knot span i with t[i] <= x < t[i+1], i in [nu-1, q-1]; x = b uses the last span.
    int i;
    if (x >= t[static_cast<std::size_t>(q)]) {
        i = q - 1;
    } else {
        const auto first = t.begin() + (nu - 1);
        const auto last = t.begin() + q + 1;
        i = static_cast<int>(std::upper_bound(first, last, x) - t.begin()) - 1;
        i = std::clamp(i, nu - 1, q - 1);
    }
    double left[32], right[32];
    if (nu > 31) throw ArgumentError("spline order above 31 is not supported");
    out[0] = 1.0;
    for (int j = 1; j < nu; ++j) {
        left[j] = x - t[static_cast<std::size_t>(i + 1 - j)];
        right[j] = t[static_cast<std::size_t>(i + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = out[static_cast<std::size_t>(r)] / (right[r + 1] + left[j - r]);
            out[static_cast<std::size_t>(r)] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[static_cast<std::size_t>(j)] = saved;
    }
    return i - nu + 1;
}

namespace {

void check_in_domain(const Domain& d, double x) {
    if (!(x >= d.lo && x <= d.hi))
        throw DomainError("abscissa " + std::to_string(x) + " outside [" + std::to_string(d.lo) + ", " +
                          std::to_string(d.hi) + "]");
}

void fourier_values(const Domain& d, int q, double x, double* out) {
    const double len = d.volume();
    out[0] = 1.0 / std::sqrt(len);
    const double amp = std::sqrt(2.0 / len);
    for (int k = 1; 2 * k - 1 < q; ++k) {
        const double arg = 2.0 * std::numbers::pi * k * (x - d.lo) / len;
        out[2 * k - 1] = amp * std::sin(arg);
        if (2 * k < q) out[2 * k] = amp * std::cos(arg);
    }
}

}  // namespace

Eigen::VectorXd BasisSpec::evaluate(double x) const {
    check_in_domain(domain_, x);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
    if (kind_ == BasisKind::Fourier) {
        fourier_values(domain_, dimension_, x, v.data());
        return v;
    }
    double vals[32];
    const int first = evaluate_nonzero(x, std::span<double>(vals, static_cast<std::size_t>(order())));
    for (int r = 0; r < order(); ++r) v[first + r] = vals[r];
    return v;
}

Eigen::MatrixXd BasisSpec::design(std::span<const double> xs) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), dimension_);
    std::vector<double> row(static_cast<std::size_t>(std::max(dimension_, order())));
    for (std::size_t j = 0; j < xs.size(); ++j) {
        check_in_domain(domain_, xs[j]);
        const auto jj = static_cast<Eigen::Index>(j);
        if (kind_ == BasisKind::Fourier) {
            fourier_values(domain_, dimension_, xs[j], row.data());
            for (int k = 0; k < dimension_; ++k) a(jj, k) = row[static_cast<std::size_t>(k)];
        } else {
            const int first = evaluate_nonzero(xs[j], row);
            for (int r = 0; r < order(); ++r) a(jj, first + r) = row[static_cast<std::size_t>(r)];
        }
    }
    return a;
}

Eigen::VectorXd BasisSpec::constant_coordinates() const {
    if (kind_ == BasisKind::BSpline) return Eigen::VectorXd::Ones(dimension_);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dimension_);
    c[0] = std::sqrt(domain_.volume());
    return c;
}

GramFactor factorize(Eigen::MatrixXd phi) {
    const Eigen::Index q = phi.rows();
    if (phi.cols() != q || q == 0) throw ContractError("Gram matrix must be square and non-empty");
    Eigen::LLT<Eigen::MatrixXd> llt(phi);
    if (llt.info() != Eigen::Success) throw RankDeficiencyError("Gram matrix is not positive definite");
    Eigen::MatrixXd u = llt.matrixU();
    const double dmax = u.diagonal().cwiseAbs().maxCoeff();
    const double dmin = u.diagonal().cwiseAbs().minCoeff();
    if (!(dmin > 1e-10 * dmax))
        throw RankDeficiencyError("Gram matrix is numerically singular (redundant basis functions)");
    return {std::move(phi), std::move(u)};
}

GramFactor gram(const BasisSpec& basis, int quad_points) {
    const int q = basis.dimension();
    if (basis.kind() == BasisKind::Fourier) return factorize(Eigen::MatrixXd::Identity(q, q));

    const int nu = basis.order();
    const int nodes = quad_points > 0 ? quad_points : nu;
    const auto& t = basis.knots().breakpoints();
    const QuadratureRule unit = gauss_legendre(nodes);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(q, q);
    std::vector<double> vals(static_cast<std::size_t>(nu));
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double half = 0.5 * (t[k + 1] - t[k]);
        const double mid = 0.5 * (t[k + 1] + t[k]);
        for (int n = 0; n < nodes; ++n) {
            const double x = mid + half * unit.nodes[static_cast<std::size_t>(n)];
            const double w = half * unit.weights[static_cast<std::size_t>(n)];
            const int first = basis.evaluate_nonzero(x, vals);
            for (int r = 0; r < nu; ++r)
                for (int c = 0; c < nu; ++c)
                    phi(first + r, first + c) += w * vals[static_cast<std::size_t>(r)] * vals[static_cast<std::size_t>(c)];
        }
    }
    phi = 0.5 * (phi + phi.transpose()).eval();
    return factorize(std::move(phi));
}

namespace {

// One differentiation step: order nu -> nu - 1 on the same breakpoints.
// d_j = (nu - 1) (c_{j+1} - c_j) / (t_{j+nu} - t_{j+1}) on the clamped sequence t.
Eigen::MatrixXd bspline_derivative_step(const KnotVector& knots) {
    const int nu = knots.order();
    const int q = knots.interior_count() + nu;
    const auto t = knots.augmented();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(q - 1, q);
    for (int j = 0; j < q - 1; ++j) {
        const double span = t[static_cast<std::size_t>(j + nu)] - t[static_cast<std::size_t>(j + 1)];
        const double f = (nu - 1) / span;
        d(j, j) = -f;
        d(j, j + 1) = f;
    }
    return d;
}

}  // namespace

DerivativeMap derivative_basis(const BasisSpec& basis, int s) {
    if (s < 0) throw ArgumentError("derivative order must be non-negative");
    const int q = basis.dimension();
    if (basis.kind() == BasisKind::Fourier) {
        if (s > 0 && q % 2 == 0)
            throw UnsupportedOrderError("Fourier derivative needs an odd basis size (unpaired last sine)");
        Eigen::MatrixXd step = Eigen::MatrixXd::Zero(q, q);
        const double len = basis.domain().volume();
        for (int k = 1; 2 * k < q; ++k) {
            const double omega = 2.0 * std::numbers::pi * k / len;
            // (sin_k)' = omega cos_k, (cos_k)' = -omega sin_k
            step(2 * k, 2 * k - 1) = omega;
            step(2 * k - 1, 2 * k) = -omega;
        }
        Eigen::MatrixXd map = Eigen::MatrixXd::Identity(q, q);
        for (int i = 0; i < s; ++i) map = step * map;
        return {basis, std::move(map)};
    }
    const int nu = basis.order();
    if (s >= nu)
        throw UnsupportedOrderError("derivative of order " + std::to_string(s) + " needs splines of order above " +
                                    std::to_string(s) + " (got " + std::to_string(nu) + ")");
    Eigen::MatrixXd map = Eigen::MatrixXd::Identity(q, q);
    KnotVector knots = basis.knots();
    for (int i = 0; i < s; ++i) {
        map = bspline_derivative_step(knots) * map;
        knots = knots.with_order(knots.order() - 1);
    }
    return {BasisSpec::bspline(std::move(knots)), std::move(map)};
}

Basis::Basis(BasisSpec spec, GramFactor gram, int quad_points)
    : spec_(std::move(spec)), gram_(std::move(gram)), quad_points_(quad_points) {}

std::shared_ptr<const Basis> Basis::create(BasisSpec spec, int quad_points) {
    GramFactor g = fdnn::gram(spec, quad_points);
    return std::shared_ptr<const Basis>(new Basis(std::move(spec), std::move(g), quad_points));
}

const Basis::Derivative& Basis::derivative(int s) const {
    std::lock_guard lock(cache_mutex_);
    if (auto it = derivatives_.find(s); it != derivatives_.end()) return it->second;
    DerivativeMap dm = derivative_basis(spec_, s);
    std::shared_ptr<const Basis> target;
    if (dm.basis == spec_) {
        // Fourier: same basis, share the Gram factor.
        target = std::shared_ptr<const Basis>(new Basis(spec_, gram_, quad_points_));
    } else {
        target = create(std::move(dm.basis), 0);
    }
    auto [it, inserted] = derivatives_.emplace(s, Derivative{std::move(target), std::move(dm.map)});
    return it->second;
}

}  // namespace fdnn

#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fdnn/fdata.hpp"

namespace fdnn {

/// Breakpoints t_0 = a < t_1 < ... < t_l < t_{l+1} = b and a spline order.
class KnotVector {
public:
    KnotVector(std::vector<double> breakpoints, int order);

    /// t_k = a + k (b - a) / (l + 1).
    static KnotVector uniform(Domain domain, int interior_count, int order);

    int order() const noexcept { return order_; }
    int interior_count() const noexcept { return static_cast<int>(breakpoints_.size()) - 2; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    Domain domain() const noexcept { return {breakpoints_.front(), breakpoints_.back()}; }

    /// Clamped sequence: each boundary repeated `order` times.
    std::vector<double> augmented() const;
    KnotVector with_order(int order) const { return KnotVector(breakpoints_, order); }

    bool operator==(const KnotVector&) const = default;

private:
    std::vector<double> breakpoints_;
    int order_;
};

enum class BasisKind { BSpline, Fourier };

/// Description of a finite basis of L2([a, b]).
///
/// B-splines use the clamped convention so the l + order functions span every
/// spline of that order on the breakpoints. The Fourier basis is orthonormal:
/// the constant 1/sqrt(b - a) followed by (sin, cos) pairs of increasing
/// frequency, truncated to q terms.
class BasisSpec {
public:
    static BasisSpec bspline(KnotVector knots);
    static BasisSpec fourier(Domain domain, int size);

    BasisKind kind() const noexcept { return kind_; }
    const Domain& domain() const noexcept { return domain_; }
    int dimension() const noexcept { return dimension_; }
    /// B-spline order; 0 for Fourier.
    int order() const noexcept { return knots_ ? knots_->order() : 0; }
    const KnotVector& knots() const;

    /// (phi_1(x), ..., phi_q(x)).
    Eigen::VectorXd evaluate(double x) const;

    /// Design matrix with entry (j, k) = phi_k(xs[j]).
    Eigen::MatrixXd design(std::span<const double> xs) const;

    /// Coordinates of the constant function 1.
    Eigen::VectorXd constant_coordinates() const;

    /// B-splines only: writes the `order` possibly nonzero values at x and
    /// returns the index of the first one.
    int evaluate_nonzero(double x, std::span<double> out) const;

    bool operator==(const BasisSpec& other) const;

private:
    BasisSpec(BasisKind kind, Domain domain, int dimension, std::shared_ptr<const KnotVector> knots);

    BasisKind kind_;
    Domain domain_;
    int dimension_;
    std::shared_ptr<const KnotVector> knots_;
    std::vector<double> augmented_;
};

struct GramFactor {
    Eigen::MatrixXd phi;   ///< phi(k, l) = <phi_k, phi_l>
    Eigen::MatrixXd chol;  ///< upper triangular U with phi = U^T U
};

/// Cholesky-factors a Gram matrix; throws RankDeficiencyError when it is not
/// numerically positive definite.
GramFactor factorize(Eigen::MatrixXd phi);

/// Gram matrix by Gauss-Legendre quadrature on each knot interval
/// (`quad_points` nodes per interval, 0 meaning the spline order, which is
/// exact); the Fourier Gram matrix is the identity.
GramFactor gram(const BasisSpec& basis, int quad_points = 0);

struct DerivativeMap {
    BasisSpec basis;      ///< basis of the s-th derivatives
    Eigen::MatrixXd map;  ///< derivative coordinates = map * coordinates
};

/// Order-(order - s) B-spline basis on the same breakpoints and the
/// finite-difference map between coordinates. Fourier bases map onto
/// themselves and need every sine paired with its cosine.
DerivativeMap derivative_basis(const BasisSpec& basis, int s);

/// A basis together with its Gram factor, shared by every representation on
/// it. Derivative bases are built on first request and cached.
class Basis {
public:
    static std::shared_ptr<const Basis> create(BasisSpec spec, int quad_points = 0);

    const BasisSpec& spec() const noexcept { return spec_; }
    const GramFactor& gram() const noexcept { return gram_; }
    int dimension() const noexcept { return spec_.dimension(); }
    const Domain& domain() const noexcept { return spec_.domain(); }

    struct Derivative {
        std::shared_ptr<const Basis> basis;
        Eigen::MatrixXd map;
    };
    const Derivative& derivative(int s) const;

    bool same_as(const Basis& other) const { return this == &other || spec_ == other.spec_; }

private:
    Basis(BasisSpec spec, GramFactor gram, int quad_points);

    BasisSpec spec_;
    GramFactor gram_;
    int quad_points_;
    mutable std::mutex cache_mutex_;
    mutable std::map<int, Derivative> derivatives_;
};

using BasisPtr = std::shared_ptr<const Basis>;

}  // namespace fdnn

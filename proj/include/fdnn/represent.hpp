#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "fdnn/basis.hpp"
#include "fdnn/fdata.hpp"

namespace fdnn {

/// A function of span(phi) stored by raw coordinates alpha and scaled
/// coordinates beta = U alpha, where U^T U is the Gram matrix. Canonical dot
/// products of beta vectors are L2 inner products of the functions.
class Representation {
public:
    Representation(BasisPtr basis, Eigen::VectorXd alpha, double sse = 0.0);
    static Representation from_beta(BasisPtr basis, const Eigen::VectorXd& beta);

    const BasisPtr& basis() const noexcept { return basis_; }
    const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
    const Eigen::VectorXd& beta() const noexcept { return beta_; }
    /// Residual sum of squares of the fit that produced it (0 otherwise).
    double sse() const noexcept { return sse_; }
    int dimension() const noexcept { return static_cast<int>(alpha_.size()); }

    double operator()(double x) const;
    Eigen::VectorXd evaluate(std::span<const double> xs) const;

private:
    BasisPtr basis_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd beta_;
    double sse_;
};

struct FitOptions {
    /// Designs whose triangular factor is worse conditioned than this are
    /// treated as not identifying every coefficient.
    double max_condition = 1e8;
};

/// Least-squares projection of the samples onto the basis.
Representation fit(const SampledFunction& f, const BasisPtr& basis, const FitOptions& options = {});

/// Diagonal of the smoother matrix S with fitted values = S y.
Eigen::VectorXd hat_diagonal(const SampledFunction& f, const BasisSpec& basis, const FitOptions& options = {});

/// Closed-form leave-one-out score (1/m) sum ((y_i - fit_i) / (1 - S_ii))^2.
double loo_score(const SampledFunction& f, const BasisSpec& basis, const FitOptions& options = {});

/// B-spline basis with uniform knots and `size` functions, or a Fourier basis.
BasisSpec make_basis_spec(BasisKind kind, Domain domain, int order, int size);

/// Candidate basis sizes: for B-splines interior-knot counts 4, 6, 8, ...,
/// min(m - order, 60); for Fourier the odd sizes 3, 5, ..., min(m - 1, 61).
std::vector<int> default_candidate_sizes(BasisKind kind, int order, std::size_t min_length);

struct CandidateScore {
    int size = 0;
    bool feasible = false;
    double total_loo = 0.0;
    std::size_t failures = 0;  ///< functions for which this size failed
    std::string reason;        ///< first failure message
};

struct BasisSelection {
    int chosen = 0;
    std::vector<CandidateScore> candidates;
};

/// Picks the size minimizing the sum over functions of their LOO scores.
/// Sizes failing on any function are skipped and reported; ties go to the
/// smaller size.
BasisSelection select_basis_size(const Dataset& data, BasisKind kind, int order, std::span<const int> sizes,
                                 const FitOptions& options = {}, unsigned threads = 1);

const Eigen::VectorXd& to_beta(const Representation& r);
double inner(const Representation& a, const Representation& b);
double dist(const Representation& a, const Representation& b);

/// Throws ContractError unless both representations live on the same basis.
void require_same_basis(const Representation& a, const Representation& b);

}  // namespace fdnn

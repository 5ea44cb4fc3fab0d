#include <doctest.h>

#include <cmath>
#include <random>

#include "fdnn/errors.hpp"
#include "fdnn/represent.hpp"
#include "../support/oracles.hpp"

using namespace fdnn;

namespace {

SampledFunction sample(const std::function<double(double)>& g, const std::vector<double>& xs) {
    std::vector<SamplePoint> pts;
    for (double x : xs) pts.push_back({x, g(x)});
    return SampledFunction(std::move(pts), 0);
}

std::vector<double> uniform_xs(double a, double b, int m) {
    std::vector<double> xs;
    for (int j = 0; j < m; ++j) xs.push_back(a + (b - a) * j / (m - 1));
    return xs;
}

BasisPtr spline_basis(double a, double b, int interior, int order) {
    return Basis::create(BasisSpec::bspline(KnotVector::uniform({a, b}, interior, order)));
}

}  // namespace

TEST_CASE("in-span samples are reproduced exactly") {
    const BasisPtr b = spline_basis(0.0, 1.0, 5, 4);
    Eigen::VectorXd alpha(9);
    alpha << 1, -2, 0.5, 3, 1, 0, -1, 2, 0.25;
    const auto xs = uniform_xs(0.0, 1.0, 40);
    const Eigen::MatrixXd design = b->spec().design(xs);
    const Eigen::VectorXd y = design * alpha;
    std::vector<SamplePoint> pts;
    for (std::size_t j = 0; j < xs.size(); ++j) pts.push_back({xs[j], y[static_cast<Eigen::Index>(j)]});
    const Representation r = fit(SampledFunction(pts, 0), b);
    CHECK(r.sse() <= 1e-18 * y.squaredNorm() + 1e-28);
    CHECK((r.alpha() - alpha).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r.beta() - b->gram().chol * r.alpha()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r.evaluate(xs) - y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("constant samples give constant coefficients") {
    const BasisPtr b = spline_basis(0.0, 2.0, 6, 3);
    const Representation r = fit(sample([](double) { return 4.5; }, uniform_xs(0.0, 2.0, 30)), b);
    CHECK((r.alpha().array() - 4.5).abs().maxCoeff() < 1e-10);
}

TEST_CASE("residuals are orthogonal to the design") {
    const BasisPtr b = spline_basis(0.0, 1.0, 4, 4);
    const auto xs = uniform_xs(0.0, 1.0, 25);
    const SampledFunction f = sample([](double x) { return std::sin(7 * x) + x * x; }, xs);
    const Representation r = fit(f, b);
    const Eigen::MatrixXd design = b->spec().design(xs);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(f.ys().data(), 25);
    CHECK((design.transpose() * (y - design * r.alpha())).norm() < 1e-9 * y.norm());
    CHECK(r.sse() == doctest::Approx((y - design * r.alpha()).squaredNorm()).epsilon(1e-10));
}

TEST_CASE("empty support is reported by index") {
    const BasisPtr b = spline_basis(0.0, 1.0, 9, 2);
    std::vector<double> xs = uniform_xs(0.0, 0.5, 30);
    xs.push_back(1.0);
    try {
        fit(sample([](double x) { return x; }, xs), b);
        FAIL("expected an unidentifiable-coefficient error");
    } catch (const UnidentifiableError& e) {
        CHECK(std::string(e.what()).find("8") != std::string::npos);
    }
}

TEST_CASE("fast leave-one-out equals naive refits") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int compared = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int order = 2 + trial % 3;
        const int interior = 1 + trial % 4;
        const int q = order + interior;
        const int m = q + 3 + static_cast<int>(u(rng) * (30 - q - 3));
        std::vector<double> xs;
        for (int j = 0; j < m; ++j) xs.push_back((j + 0.8 * (u(rng) - 0.5)) / (m - 1));
        xs.front() = 0.0;
        xs.back() = 1.0;
        std::vector<SamplePoint> pts;
        for (double x : xs) pts.push_back({x, std::cos(4 * x) + 0.2 * (u(rng) - 0.5)});
        const SampledFunction f(pts, 0);
        const BasisSpec spec = BasisSpec::bspline(KnotVector::uniform({0.0, 1.0}, interior, order));
        double fast = 0.0;
        try {
            fast = loo_score(f, spec);
        } catch (const Error&) {
            continue;  // random design without full support
        }
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(f.ys().data(), m);
        const double naive = oracle::naive_loo(spec.design(xs), y);
        CHECK(std::abs(fast - naive) <= 1e-10 * naive);
        ++compared;
    }
    CHECK(compared == 50);
}

TEST_CASE("hat diagonal sums to the basis size") {
    const BasisSpec spec = BasisSpec::bspline(KnotVector::uniform({0.0, 1.0}, 10, 4));
    const SampledFunction f = sample([](double x) { return std::exp(x); }, uniform_xs(0.0, 1.0, 60));
    const Eigen::VectorXd h = hat_diagonal(f, spec);
    CHECK(std::abs(h.sum() - 14.0) < 1e-8);
    CHECK(h.minCoeff() >= -1e-10);
    CHECK(h.maxCoeff() <= 1.0 + 1e-10);
}

TEST_CASE("square designs are degenerate for leave-one-out") {
    const BasisSpec spec = BasisSpec::bspline(KnotVector::uniform({0.0, 1.0}, 3, 3));
    const SampledFunction f = sample([](double x) { return x; }, uniform_xs(0.0, 1.0, 6));
    CHECK_THROWS_AS(loo_score(f, spec), DegenerateLooError);
}

TEST_CASE("leave-one-out penalizes needless basis functions") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 0.05);
    const auto xs = uniform_xs(0.0, 1.0, 80);
    const Eigen::VectorXd truth = (Eigen::VectorXd(7) << 0, 1, -1, 2, 0.5, 1, 0).finished();
    const BasisSpec small = BasisSpec::bspline(KnotVector::uniform({0.0, 1.0}, 3, 4));
    double total_small = 0.0, total_big = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<SamplePoint> pts;
        const Eigen::MatrixXd d = small.design(xs);
        for (std::size_t j = 0; j < xs.size(); ++j)
            pts.push_back({xs[j], d.row(static_cast<Eigen::Index>(j)).dot(truth) + noise(rng)});
        const SampledFunction f(pts, 0);
        total_small += loo_score(f, small);
        total_big += loo_score(f, BasisSpec::bspline(KnotVector::uniform({0.0, 1.0}, 30, 4)));
    }
    CHECK(total_big > total_small);
}

TEST_CASE("basis size selection") {
    std::vector<SampledFunction> fs;
    for (int i = 0; i < 5; ++i)
        fs.push_back(sample([i](double x) { return std::sin((3 + i) * x); }, uniform_xs(0.0, 3.0, 50)));
    const Dataset d(fs, std::vector<double>(5, 0.0), Domain{0.0, 3.0});
    const std::vector<int> one{9};
    CHECK(select_basis_size(d, BasisKind::BSpline, 4, one).chosen == 9);

    const auto sizes = default_candidate_sizes(BasisKind::BSpline, 4, 50);
    CHECK(sizes.front() == 8);
    CHECK(sizes.back() == 4 + 46);
    const BasisSelection sel = select_basis_size(d, BasisKind::BSpline, 4, sizes, {}, 3);
    CHECK(sel.chosen >= 8);
    // Thread count does not change the result.
    CHECK(select_basis_size(d, BasisKind::BSpline, 4, sizes, {}, 1).chosen == sel.chosen);
    // A size equal to m is infeasible and reported.
    const std::vector<int> too_big{50};
    CHECK_THROWS_AS(select_basis_size(d, BasisKind::BSpline, 4, too_big), SelectionError);

    const auto fourier = default_candidate_sizes(BasisKind::Fourier, 0, 50);
    CHECK(fourier.front() == 3);
    CHECK(fourier.back() == 49);
}

TEST_CASE("inner products and distances match quadrature") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int order = 3 + trial % 3;
        const BasisPtr b = spline_basis(-1.0, 2.0, 6, order);
        const auto t = oracle::clamped(-1.0, 2.0, 6, order);
        Eigen::VectorXd a1(b->dimension()), a2(b->dimension());
        for (Eigen::Index k = 0; k < a1.size(); ++k) {
            a1[k] = g(rng);
            a2[k] = g(rng);
        }
        const Representation r1(b, a1), r2(b, a2);
        const double ip = oracle::simpson(
            [&](double x) { return oracle::spline_value(t, order, a1, x) * oracle::spline_value(t, order, a2, x); }, -1.0,
            2.0);
        const double d2 = oracle::simpson(
            [&](double x) {
                const double e = oracle::spline_value(t, order, a1, x) - oracle::spline_value(t, order, a2, x);
                return e * e;
            },
            -1.0, 2.0);
        CHECK(std::abs(inner(r1, r2) - ip) <= 1e-8 * std::max(1.0, std::abs(ip)));
        CHECK(std::abs(dist(r1, r2) - std::sqrt(d2)) <= 1e-8 * std::sqrt(d2));
        CHECK(dist(r1, r1) == 0.0);
    }
}

TEST_CASE("coordinates are linear") {
    const BasisPtr b = spline_basis(0.0, 1.0, 5, 4);
    const auto xs = uniform_xs(0.0, 1.0, 30);
    const Representation u = fit(sample([](double x) { return std::sin(3 * x); }, xs), b);
    const Representation v = fit(sample([](double x) { return x * x; }, xs), b);
    const Representation w = fit(sample([](double x) { return 2 * std::sin(3 * x) - 3 * x * x; }, xs), b);
    CHECK((w.beta() - (2 * u.beta() - 3 * v.beta())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fourier coordinates need no scaling") {
    const BasisPtr b = Basis::create(BasisSpec::fourier({0.0, 1.0}, 7));
    const Representation r = fit(sample([](double x) { return std::cos(2 * M_PI * x) + 1.0; }, uniform_xs(0.0, 1.0, 40)), b);
    CHECK(r.beta() == r.alpha());
}

TEST_CASE("representations on different bases do not mix") {
    const BasisPtr a = spline_basis(0.0, 1.0, 5, 4);
    const BasisPtr b = spline_basis(0.0, 1.0, 6, 4);
    const Representation ra(a, Eigen::VectorXd::Ones(9)), rb(b, Eigen::VectorXd::Ones(10));
    CHECK_THROWS_AS(inner(ra, rb), ContractError);
    // Same spec built twice is the same basis.
    const Representation rc(spline_basis(0.0, 1.0, 5, 4), Eigen::VectorXd::Ones(9));
    CHECK_NOTHROW(inner(ra, rc));
}

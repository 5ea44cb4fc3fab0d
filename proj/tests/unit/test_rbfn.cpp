#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fdnn/errors.hpp"
#include "fdnn/rbfn.hpp"
#include "fdnn/selection.hpp"
#include "../support/oracles.hpp"

using namespace fdnn;

namespace {

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Problem wave(int n, std::uint64_t seed, double noise) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::normal_distribution<double> g(0.0, noise);
    Problem p{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        p.x.row(i) << u(rng), u(rng);
        p.y[i] = std::sin(2 * p.x(i, 0)) * std::cos(p.x(i, 1)) + (noise > 0 ? g(rng) : 0.0);
    }
    return p;
}

}  // namespace

TEST_CASE("prediction basics") {
    Eigen::MatrixXd c(1, 2);
    c << 0.5, -1.0;
    const RbfnModel one(c, Eigen::VectorXd::Constant(1, 3.0), 0.7, 0.0);
    CHECK(one.predict(Eigen::VectorXd(Eigen::Vector2d(0.5, -1.0))) == doctest::Approx(3.0));
    const Eigen::VectorXd far = Eigen::Vector2d(0.5 + 20 * 0.7, -1.0);
    CHECK(std::abs(one.predict(far)) < 1e-6 * 3.0);

    Eigen::MatrixXd cs(3, 2);
    cs << 0, 0, 1, 1, -1, 2;
    const RbfnModel zero(cs, Eigen::VectorXd::Zero(3), 1.0, 0.0);
    CHECK(zero.predict(Eigen::VectorXd(Eigen::Vector2d(0.3, 0.1))) == 0.0);
    CHECK_THROWS_AS(zero.predict(Eigen::VectorXd(Eigen::Vector3d(0, 0, 0))), ContractError);
}

TEST_CASE("prediction ignores the order of centers") {
    Eigen::MatrixXd cs(3, 2);
    cs << 0, 0, 1, 1, -1, 2;
    const Eigen::Vector3d w(1.0, -2.0, 0.5);
    Eigen::MatrixXd perm(3, 2);
    perm << -1, 2, 0, 0, 1, 1;
    const RbfnModel a(cs, w, 0.9, 0.0), b(perm, Eigen::Vector3d(0.5, 1.0, -2.0), 0.9, 0.0);
    const Eigen::VectorXd x = Eigen::Vector2d(0.2, 0.4);
    CHECK(std::abs(a.predict(x) - b.predict(x)) < 1e-14);
}

TEST_CASE("forward selection matches brute-force greedy") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8 + trial % 13;
        Eigen::MatrixXd x(n, 3);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 3; ++j) x(i, j) = g(rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = g(rng);
        const double width = 1.5;
        // Candidates restricted to the first five rows.
        const Eigen::MatrixXd cand = x.topRows(std::min(n, 5));
        const Eigen::MatrixXd design = gaussian_design(x, cand, width);
        const auto expect = oracle::brute_force_greedy(design, y, static_cast<std::size_t>(cand.rows()));

        // The library selects among all rows; compare with an all-rows oracle.
        const Eigen::MatrixXd full = gaussian_design(x, x, width);
        const auto expect_all = oracle::brute_force_greedy(full, y, 5);
        const OlsPath path = train_ols(x, y, width, 0.0, 5);
        REQUIRE(path.size() == expect_all.size());
        for (std::size_t s = 0; s < path.size(); ++s) {
            CHECK(path.selected[s] == expect_all[s]);
            std::vector<Eigen::Index> prefix(expect_all.begin(), expect_all.begin() + static_cast<long>(s) + 1);
            const double r = oracle::ls_residual(full, prefix, y);
            CHECK(std::abs(path.regularized_error[s] - r) <= 1e-8 * y.squaredNorm());
        }
        CHECK(!expect.empty());
    }
}

TEST_CASE("regularized error never increases and centers are distinct") {
    const Problem p = wave(60, 3, 0.1);
    for (double ridge : {0.0, 1e-3, 0.1, 1.0}) {
        const OlsPath path = train_ols(p.x, p.y, 0.8, ridge, 40);
        for (std::size_t s = 1; s < path.size(); ++s)
            CHECK(path.regularized_error[s] <= path.regularized_error[s - 1] + 1e-12 * p.y.squaredNorm());
        CHECK(std::set<Eigen::Index>(path.selected.begin(), path.selected.end()).size() == path.size());
    }
}

TEST_CASE("prefix weights reproduce the regularized error") {
    const Problem p = wave(40, 8, 0.05);
    const double ridge = 0.01;
    const OlsPath path = train_ols(p.x, p.y, 1.0, ridge, 12);
    for (std::size_t k : {1u, 5u, 12u}) {
        const RbfnModel m = path.model(k);
        CHECK(m.center_count() == static_cast<Eigen::Index>(k));
        const Eigen::VectorXd e = p.y - m.predict(p.x);
        // Least-squares part of the criterion: prediction error of the prefix model.
        CHECK(e.squaredNorm() <= path.regularized_error[k - 1] + 1e-10);
    }
}

TEST_CASE("interpolation limit") {
    const Problem p = wave(25, 4, 0.0);
    const OlsPath path = train_ols(p.x, p.y, 0.7, 0.0, 25);
    const RbfnModel m = path.model(path.size());
    CHECK((p.y - m.predict(p.x)).squaredNorm() <= 1e-8 * p.y.squaredNorm());
}

TEST_CASE("center count chosen by cross-validation is interior") {
    const Problem p = wave(120, 9, 0.3);
    const FoldPlan plan = make_folds(120, 4, 17);
    const CenterSelection sel = select_centers(p.x, p.y, 0.5, 0.0, 60, plan);
    CHECK(sel.chosen > 1);
    CHECK(sel.chosen < 60);
    CHECK(select_centers(p.x, p.y, 0.5, 0.0, 60, plan).chosen == sel.chosen);

    const CenterSelection single = select_centers(p.x, p.y, 0.5, 0.0, 1, plan);
    CHECK(single.chosen == 1);
}

TEST_CASE("median pairwise distance") {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 3;
    CHECK(median_pairwise_distance(x) == doctest::Approx(2.0));
}

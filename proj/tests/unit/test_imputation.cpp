#include <doctest.h>

#include <cmath>
#include <random>

#include "fdnn/errors.hpp"
#include "fdnn/imputation.hpp"

using namespace fdnn;

namespace {

MaskedVector mv(std::vector<double> v, std::vector<char> obs) {
    return MaskedVector(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), std::move(obs));
}

std::vector<MaskedVector> random_holes(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<MaskedVector> out;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(p);
        std::vector<char> obs(static_cast<std::size_t>(p), 1);
        const double level = 3 * u(rng);
        for (int j = 0; j < p; ++j) {
            v[j] = level + std::sin(0.3 * j + u(rng));
            if (u(rng) < 0.15 && j != i % p) obs[static_cast<std::size_t>(j)] = 0;
        }
        out.emplace_back(v, obs);
    }
    return out;
}

}  // namespace

TEST_CASE("masked vectors need an observed entry") {
    CHECK_THROWS_AS(mv({1, 2}, {0, 0}), ValidationError);
    CHECK(mv({1, 2, 3}, {1, 0, 1}).observed_count() == 2);
}

TEST_CASE("mean imputation") {
    const std::vector<MaskedVector> d{mv({1, 5}, {1, 1}), mv({0, 7}, {0, 1}), mv({3, 9}, {1, 1})};
    const Eigen::MatrixXd out = mean_impute(d);
    CHECK(out(1, 0) == doctest::Approx(2.0));
    CHECK(out(1, 1) == 7.0);
    const std::vector<MaskedVector> full{mv({1, 2}, {1, 1}), mv({3, 4}, {1, 1})};
    CHECK(mean_impute(full) == (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished());
    const std::vector<MaskedVector> hole{mv({1, 2}, {1, 0}), mv({3, 4}, {1, 0})};
    CHECK_THROWS_AS(mean_impute(hole), ImputationError);
}

TEST_CASE("missing-aware distance") {
    const MaskedVector a = mv({1, 2, 3, 4}, {1, 1, 0, 1});
    const MaskedVector b = mv({1, 4, 9, 9}, {1, 1, 1, 0});
    CHECK(missing_aware_distance(a, b) == doctest::Approx(2.0));  // (0 + 4) / 2
    CHECK(missing_aware_distance(a, b) == missing_aware_distance(b, a));
    CHECK(missing_aware_distance(a, a) == 0.0);
    CHECK(std::isnan(missing_aware_distance(mv({1, 0}, {1, 0}), mv({0, 1}, {0, 1}))));
}

TEST_CASE("one nearest neighbour copies the matching sample") {
    const std::vector<MaskedVector> d{mv({1, 2, 0}, {1, 1, 0}), mv({1, 2, 7}, {1, 1, 1}), mv({5, 5, 1}, {1, 1, 1})};
    const Eigen::MatrixXd out = knn_impute(d, 1);
    CHECK(out(0, 2) == 7.0);
    const Eigen::MatrixXd two = knn_impute(d, 2);
    CHECK(two(0, 2) == doctest::Approx(4.0));
}

TEST_CASE("too few donors warns and uses all") {
    const std::vector<MaskedVector> d{mv({1, 0}, {1, 0}), mv({1, 3}, {1, 1}), mv({2, 0}, {1, 0})};
    std::vector<std::string> warnings;
    const Eigen::MatrixXd out = knn_impute(d, 4, &warnings);
    CHECK(out(0, 1) == 3.0);
    CHECK(!warnings.empty());
    const std::vector<MaskedVector> none{mv({1, 0}, {1, 0}), mv({0, 3}, {0, 1})};
    CHECK_THROWS_AS(knn_impute(none, 1), ImputationError);
}

TEST_CASE("distance ties go to the lower index") {
    const std::vector<MaskedVector> donors{mv({0, 10}, {1, 1}), mv({2, 20}, {1, 1})};
    const KnnImputation r = knn_impute_one(mv({1, 0}, {1, 0}), donors, 1);
    CHECK(r.values[1] == 10.0);
}

TEST_CASE("imputation never alters observed entries") {
    const auto d = random_holes(30, 12, 5);
    for (const Eigen::MatrixXd& out : {mean_impute(d), knn_impute(d, 3)})
        for (int i = 0; i < 30; ++i)
            for (int j = 0; j < 12; ++j)
                if (d[static_cast<std::size_t>(i)].observed[static_cast<std::size_t>(j)])
                    CHECK(out(i, j) == d[static_cast<std::size_t>(i)].values[j]);
}

TEST_CASE("expert scaling") {
    const MaskedVector s = expert_scale(mv({1, 99, 3}, {1, 0, 1}));
    CHECK(s.values[0] == doctest::Approx(-1 / std::sqrt(2.0)));
    CHECK(s.values[2] == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(s.observed == std::vector<char>{1, 0, 1});

    const auto d = random_holes(10, 8, 6);
    for (const auto& x : d) {
        const MaskedVector e = expert_scale(x);
        double mean = 0.0, ss = 0.0;
        for (int j = 0; j < 8; ++j)
            if (e.observed[static_cast<std::size_t>(j)]) mean += e.values[j];
        mean /= static_cast<double>(e.observed_count());
        for (int j = 0; j < 8; ++j)
            if (e.observed[static_cast<std::size_t>(j)]) ss += (e.values[j] - mean) * (e.values[j] - mean);
        CHECK(std::abs(mean) < 1e-12);
        CHECK(ss == doctest::Approx(1.0).epsilon(1e-12));
        for (double a : {2.5, -0.3}) {
            const MaskedVector t = expert_scale(MaskedVector((a * x.values.array() + 4.0).matrix(), x.observed));
            for (int j = 0; j < 8; ++j)
                if (x.observed[static_cast<std::size_t>(j)])
                    CHECK(std::abs(t.values[j] - (a > 0 ? 1 : -1) * e.values[j]) < 1e-12);
        }
    }
    CHECK_THROWS_AS(expert_scale(mv({2, 2, 2}, {1, 1, 1})), ScalingError);
    CHECK_THROWS_AS(expert_scale(mv({2, 5}, {1, 0})), ScalingError);
}

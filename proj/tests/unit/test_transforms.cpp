#include <doctest.h>

#include <cmath>
#include <random>

#include "fdnn/errors.hpp"
#include "fdnn/transforms.hpp"
#include "../support/oracles.hpp"

using namespace fdnn;

namespace {

BasisPtr spline_basis(int interior, int order, Domain d = {0.0, 2.0}) {
    return Basis::create(BasisSpec::bspline(KnotVector::uniform(d, interior, order)));
}

Representation fit_fn(const BasisPtr& b, const std::function<double(double)>& g, int m = 80) {
    std::vector<SamplePoint> pts;
    const Domain d = b->domain();
    for (int j = 0; j < m; ++j) {
        const double x = d.lo + (d.hi - d.lo) * j / (m - 1);
        pts.push_back({x, g(x)});
    }
    return fit(SampledFunction(pts, 0), b);
}

}  // namespace

TEST_CASE("functional mean from coordinates") {
    const BasisPtr b = spline_basis(6, 4);
    const Representation r = fit_fn(b, [](double x) { return 3.0 + x * x; });
    // (1/2) * integral_0^2 (3 + x^2) dx = 3 + 4/3
    CHECK(mean_value(r) == doctest::Approx(3.0 + 4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("centering and reduction") {
    const BasisPtr b = spline_basis(8, 4);
    const Representation r = fit_fn(b, [](double x) { return 2.0 + std::sin(3 * x); });
    const Representation c = center(r);
    CHECK(std::abs(mean_value(c)) < 1e-10 * std::abs(mean_value(r)));
    const Representation s = center_reduce(r);
    CHECK(s.beta().norm() == doctest::Approx(b->domain().volume()).epsilon(1e-12));
    // Idempotent.
    CHECK((center_reduce(s).beta() - s.beta()).cwiseAbs().maxCoeff() < 1e-12);
    const FunctionalScaler fs = functional_scaler(r);
    CHECK(fs.volume == doctest::Approx(2.0));
    CHECK(fs.mean == doctest::Approx(mean_value(r)));
}

TEST_CASE("affine changes of values only flip the sign of the reduced function") {
    const BasisPtr b = spline_basis(8, 4);
    const Representation r = fit_fn(b, [](double x) { return std::cos(2 * x) + x; });
    for (double a : {3.0, -0.5}) {
        const Representation t = fit_fn(b, [a](double x) { return a * (std::cos(2 * x) + x) + 7.0; });
        const double sign = a > 0 ? 1.0 : -1.0;
        CHECK((center_reduce(t).beta() - sign * center_reduce(r).beta()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("constant functions cannot be reduced") {
    const BasisPtr b = spline_basis(5, 4);
    const Representation r = fit_fn(b, [](double) { return 1.5; });
    CHECK(center(r).beta().norm() < 1e-12);
    CHECK_THROWS_AS(center_reduce(r), ConstantFunctionError);
}

TEST_CASE("derivatives of in-span polynomials are exact") {
    for (int order = 4; order <= 6; ++order) {
        const BasisPtr b = spline_basis(7, order, {-1.0, 2.0});
        // Degree order-1 polynomial lies in the spline space.
        auto p = [order](double x) {
            double s = 0.0;
            for (int k = 0; k < order; ++k) s += (k + 1) * 0.3 * std::pow(x, k);
            return s;
        };
        auto dp = [order](double x, int s) {
            double v = 0.0;
            for (int k = s; k < order; ++k) {
                double f = 1.0;
                for (int j = 0; j < s; ++j) f *= (k - j);
                v += (k + 1) * 0.3 * f * std::pow(x, k - s);
            }
            return v;
        };
        const Representation r = fit_fn(b, p, 200);
        for (int s = 1; s <= 2; ++s) {
            const Representation d = derive(r, s);
            CHECK(d.basis()->spec().order() == order - s);
            for (int i = 0; i < 100; ++i) {
                const double x = -1.0 + 3.0 * i / 99.0;
                CHECK(std::abs(d(x) - dp(x, s)) < 1e-9);
            }
        }
    }
}

TEST_CASE("derivative composition and lines") {
    const BasisPtr b = spline_basis(9, 6);
    const Representation r = fit_fn(b, [](double x) { return std::exp(-x) * std::sin(4 * x); });
    const Representation d11 = derive(derive(r, 1), 1);
    const Representation d2 = derive(r, 2);
    CHECK((d11.alpha() - d2.alpha()).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + d2.alpha().cwiseAbs().maxCoeff()));

    const Representation line = fit_fn(b, [](double x) { return 2.0 - 3.0 * x; });
    CHECK(derive(line, 2).alpha().cwiseAbs().maxCoeff() < 1e-9);
    CHECK_THROWS_AS(derive(fit_fn(spline_basis(4, 2), [](double x) { return x; }), 2), UnsupportedOrderError);
}

TEST_CASE("semi-metrics") {
    const BasisPtr b = spline_basis(10, 5);
    const Representation g = fit_fn(b, [](double x) { return std::sin(2 * x); });
    const Representation h = fit_fn(b, [](double x) { return std::cos(x) * x; });
    const Representation shifted = fit_fn(b, [](double x) { return std::sin(2 * x) + 4.0; });
    for (auto kind : {SemiMetricKind::L2, SemiMetricKind::Deriv1, SemiMetricKind::Deriv2}) {
        const SemiMetricSpec spec{kind};
        CHECK(distance(g, g, spec) == 0.0);
        CHECK(distance(g, h, spec) == doctest::Approx(distance(h, g, spec)).epsilon(1e-14));
    }
    const SemiMetricSpec d1{SemiMetricKind::Deriv1};
    CHECK(distance(g, shifted, d1) < 1e-9);
    CHECK(std::abs(distance(shifted, h, d1) - distance(g, h, d1)) < 1e-9);
    CHECK(distance(g, shifted, {}) == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-9));

    CHECK(parse_semi_metric("deriv2") == SemiMetricKind::Deriv2);
    CHECK(to_string(SemiMetricKind::Deriv1) == "deriv1");
    CHECK_THROWS_AS(parse_semi_metric("sobolev"), ArgumentError);
}

TEST_CASE("l2 distance matches quadrature of the squared difference") {
    const BasisPtr b = spline_basis(6, 4, {0.0, 1.0});
    const auto t = oracle::clamped(0.0, 1.0, 6, 4);
    const Representation g = fit_fn(b, [](double x) { return std::sin(5 * x); });
    const Representation h = fit_fn(b, [](double x) { return x * x * x; });
    const double q = oracle::simpson(
        [&](double x) {
            const double e = oracle::spline_value(t, 4, g.alpha(), x) - oracle::spline_value(t, 4, h.alpha(), x);
            return e * e;
        },
        0.0, 1.0);
    CHECK(std::abs(distance(g, h, {}) - std::sqrt(q)) < 1e-8 * std::sqrt(q));
}

TEST_CASE("fourier derivatives") {
    const BasisPtr b = Basis::create(BasisSpec::fourier({0.0, 1.0}, 7));
    const Representation r = fit_fn(b, [](double x) { return 1.0 + std::sin(2 * M_PI * x); }, 64);
    const Representation d = derive(r, 1);
    for (double x : {0.1, 0.4, 0.77}) CHECK(d(x) == doctest::Approx(2 * M_PI * std::cos(2 * M_PI * x)).epsilon(1e-9));
}

#include "fdnn/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "fdnn/errors.hpp"

namespace fdnn {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ArgumentError("Gauss-Legendre rule needs at least one node");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    // Roots are symmetric; Newton on P_n from the Chebyshev initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = mid - half * z;
        rule.nodes[hi] = mid + half * z;
        rule.weights[lo] = half * w;
        rule.weights[hi] = half * w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = mid;
    return rule;
}

}  // namespace fdnn

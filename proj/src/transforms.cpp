#include "fdnn/transforms.hpp"

#include <cmath>

#include "fdnn/errors.hpp"

namespace fdnn {

namespace {

Eigen::VectorXd constant_beta(const Basis& basis) {
    return basis.gram().chol.triangularView<Eigen::Upper>() * basis.spec().constant_coordinates();
}

}  // namespace

double mean_value(const Representation& r) {
    const Basis& basis = *r.basis();
    return r.beta().dot(constant_beta(basis)) / basis.domain().volume();
}

FunctionalScaler functional_scaler(const Representation& r) {
    FunctionalScaler s;
    s.volume = r.basis()->domain().volume();
    s.mean = mean_value(r);
    s.scale = center(r).beta().norm() / s.volume;
    return s;
}

Representation center(const Representation& r) {
    const double mu = mean_value(r);
    Eigen::VectorXd alpha = r.alpha() - mu * r.basis()->spec().constant_coordinates();
    return Representation(r.basis(), std::move(alpha));
}

Representation center_reduce(const Representation& r) {
    const Representation c = center(r);
    const double norm = c.beta().norm();
    if (!(norm >= 1e-12 * r.beta().norm()) || norm == 0.0)
        throw ConstantFunctionError("cannot reduce a constant function");
    const double volume = r.basis()->domain().volume();
    return Representation(r.basis(), c.alpha() * (volume / norm));
}

Representation derive(const Representation& r, int s) {
    if (s == 0) return r;
    const auto& d = r.basis()->derivative(s);
    return Representation(d.basis, d.map * r.alpha());
}

SemiMetricKind parse_semi_metric(const std::string& name) {
    if (name == "l2") return SemiMetricKind::L2;
    if (name == "deriv1") return SemiMetricKind::Deriv1;
    if (name == "deriv2") return SemiMetricKind::Deriv2;
    throw ArgumentError("unknown metric '" + name + "' (expected l2, deriv1 or deriv2)");
}

std::string to_string(SemiMetricKind kind) {
    switch (kind) {
        case SemiMetricKind::L2: return "l2";
        case SemiMetricKind::Deriv1: return "deriv1";
        case SemiMetricKind::Deriv2: return "deriv2";
    }
    return "l2";
}

Representation metric_image(const Representation& r, const SemiMetricSpec& spec) {
    return derive(r, spec.derivative_order());
}

double distance(const Representation& a, const Representation& b, const SemiMetricSpec& spec) {
    require_same_basis(a, b);
    const int s = spec.derivative_order();
    if (s == 0) return (a.beta() - b.beta()).norm();
    // Derivation is linear, so D^s a - D^s b = D^s (a - b).
    const Representation diff(a.basis(), a.alpha() - b.alpha());
    return derive(diff, s).beta().norm();
}

}  // namespace fdnn

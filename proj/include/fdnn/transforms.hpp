#pragma once

#include <string>

#include "fdnn/represent.hpp"

namespace fdnn {

/// Per-function mean and scale: mean = (1/|V|) integral of g,
/// scale = (1/|V|) ||g - mean||.
struct FunctionalScaler {
    double volume = 0.0;
    double mean = 0.0;
    double scale = 0.0;
};

FunctionalScaler functional_scaler(const Representation& r);

/// (1/|V|) integral of g, computed from coordinates.
double mean_value(const Representation& r);

/// g_c = g - mean(g).
Representation center(const Representation& r);

/// g_s = g_c / ((1/|V|) ||g_c||); throws ConstantFunctionError for
/// (numerically) constant g.
Representation center_reduce(const Representation& r);

/// s-th derivative on the derivative basis.
Representation derive(const Representation& r, int s);

enum class SemiMetricKind { L2, Deriv1, Deriv2 };

struct SemiMetricSpec {
    SemiMetricKind kind = SemiMetricKind::L2;

    int derivative_order() const noexcept {
        return kind == SemiMetricKind::Deriv1 ? 1 : kind == SemiMetricKind::Deriv2 ? 2 : 0;
    }
    bool operator==(const SemiMetricSpec&) const = default;
};

SemiMetricKind parse_semi_metric(const std::string& name);
std::string to_string(SemiMetricKind kind);

/// The element the semi-metric compares: r itself for L2, its s-th
/// derivative otherwise. Centers are stored in this space.
Representation metric_image(const Representation& r, const SemiMetricSpec& spec);

/// l2: ||beta1 - beta2||; deriv(s): ||beta(D^s g1) - beta(D^s g2)||.
double distance(const Representation& a, const Representation& b, const SemiMetricSpec& spec);

}  // namespace fdnn

#include "fdnn/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fdnn/errors.hpp"

namespace fdnn {

MaskedVector::MaskedVector(Eigen::VectorXd v, std::vector<char> obs) : values(std::move(v)), observed(std::move(obs)) {
    if (static_cast<Eigen::Index>(observed.size()) != values.size())
        throw ContractError("mask length does not match the vector");
    if (observed_count() == 0) throw ValidationError("a masked vector needs at least one observed entry");
}

std::size_t MaskedVector::observed_count() const {
    return static_cast<std::size_t>(std::count_if(observed.begin(), observed.end(), [](char c) { return c != 0; }));
}

bool MaskedVector::complete() const { return observed_count() == observed.size(); }

std::vector<MaskedVector> to_masked(const Dataset& data, std::span<const double> grid) {
    std::vector<MaskedVector> out;
    out.reserve(data.size());
    const auto p = static_cast<Eigen::Index>(grid.size());
    for (const auto& f : data.functions()) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
        std::vector<char> obs(grid.size(), 0);
        std::size_t g = 0;
        for (const auto& pt : f.points()) {
            while (g < grid.size() && grid[g] < pt.x) ++g;
            if (g == grid.size() || grid[g] != pt.x)
                throw ValidationError("function " + std::to_string(f.id()) + ": abscissa " + std::to_string(pt.x) +
                                      " is not on the common grid");
            v[static_cast<Eigen::Index>(g)] = pt.y;
            obs[g] = 1;
        }
        out.emplace_back(std::move(v), std::move(obs));
    }
    return out;
}

Eigen::VectorXd observed_column_means(std::span<const MaskedVector> data) {
    if (data.empty()) throw ImputationError("no samples to impute from");
    const Eigen::Index p = data.front().size();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(p);
    for (const auto& x : data) {
        if (x.size() != p) throw ContractError("masked vectors of different lengths");
        for (Eigen::Index j = 0; j < p; ++j)
            if (x.observed[static_cast<std::size_t>(j)]) {
                sum[j] += x.values[j];
                count[j] += 1.0;
            }
    }
    for (Eigen::Index j = 0; j < p; ++j)
        if (count[j] == 0.0) throw ImputationError("column " + std::to_string(j) + " is never observed");
    return sum.cwiseQuotient(count);
}

Eigen::VectorXd fill_with(const MaskedVector& x, const Eigen::VectorXd& column_values) {
    if (column_values.size() != x.size()) throw ContractError("fill values do not match the vector length");
    Eigen::VectorXd out = x.values;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (!x.observed[static_cast<std::size_t>(j)]) out[j] = column_values[j];
    return out;
}

Eigen::MatrixXd mean_impute(std::span<const MaskedVector> data) {
    const Eigen::VectorXd means = observed_column_means(data);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), means.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = fill_with(data[i], means).transpose();
    return out;
}

double missing_aware_distance(const MaskedVector& a, const MaskedVector& b) {
    if (a.size() != b.size()) throw ContractError("masked vectors of different lengths");
    double s = 0.0;
    std::size_t shared = 0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (a.observed[jj] && b.observed[jj]) {
            const double d = a.values[j] - b.values[j];
            s += d * d;
            ++shared;
        }
    }
    return shared == 0 ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(shared);
}

KnnImputation knn_impute_one(const MaskedVector& x, std::span<const MaskedVector> donors, int k, std::size_t skip) {
    if (k < 1) throw ArgumentError("k must be at least 1");
    KnnImputation out{x.values, {}};
    if (x.complete()) return out;

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(donors.size());
    for (std::size_t i = 0; i < donors.size(); ++i) {
        if (i == skip) continue;
        const double d = missing_aware_distance(x, donors[i]);
        if (!std::isnan(d)) ranked.emplace_back(d, i);
    }
    if (ranked.empty()) throw ImputationError("sample shares no observed index with any donor");
    std::sort(ranked.begin(), ranked.end());

    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const auto jj = static_cast<std::size_t>(j);
        if (x.observed[jj]) continue;
        double sum = 0.0;
        int used = 0;
        for (const auto& [d, i] : ranked) {
            if (!donors[i].observed[jj]) continue;
            sum += donors[i].values[j];
            if (++used == k) break;
        }
        if (used == 0) throw ImputationError("no donor observes coordinate " + std::to_string(j));
        if (used < k)
            out.warnings.push_back("coordinate " + std::to_string(j) + ": only " + std::to_string(used) +
                                   " donors observe it (k = " + std::to_string(k) + ")");
        out.values[j] = sum / used;
    }
    return out;
}

Eigen::MatrixXd knn_impute(std::span<const MaskedVector> data, int k, std::vector<std::string>* warnings) {
    if (data.empty()) throw ImputationError("no samples to impute");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), data.front().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        KnnImputation r = knn_impute_one(data[i], data, k, i);
        out.row(static_cast<Eigen::Index>(i)) = r.values.transpose();
        if (warnings)
            for (auto& w : r.warnings) warnings->push_back("sample " + std::to_string(i) + ": " + w);
    }
    return out;
}

MaskedVector expert_scale(const MaskedVector& x) {
    const std::size_t count = x.observed_count();
    if (count < 2) throw ScalingError("expert scaling needs at least two observed entries");
    double mean = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (x.observed[static_cast<std::size_t>(j)]) mean += x.values[j];
    mean /= static_cast<double>(count);
    double ss = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (x.observed[static_cast<std::size_t>(j)]) ss += (x.values[j] - mean) * (x.values[j] - mean);
    if (!(ss > 0.0)) throw ScalingError("observed entries are constant");
    const double denom = std::sqrt(ss);
    Eigen::VectorXd v = x.values;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        v[j] = x.observed[static_cast<std::size_t>(j)] ? (x.values[j] - mean) / denom : 0.0;
    return MaskedVector(std::move(v), x.observed);
}

}  // namespace fdnn

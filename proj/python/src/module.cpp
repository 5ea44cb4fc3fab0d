#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/experiment.hpp"
#include "fdnn/fpca.hpp"
#include "fdnn/imputation.hpp"
#include "fdnn/mlp.hpp"
#include "fdnn/rbfn.hpp"
#include "fdnn/represent.hpp"
#include "fdnn/transforms.hpp"

namespace py = pybind11;
using namespace fdnn;

namespace {

BasisKind parse_kind(const std::string& kind) {
    if (kind == "bspline") return BasisKind::BSpline;
    if (kind == "fourier") return BasisKind::Fourier;
    throw ArgumentError("unknown basis kind '" + kind + "' (bspline|fourier)");
}

SampledFunction to_function(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t id = 0) {
    if (xs.size() != ys.size()) throw ArgumentError("x and y lengths differ");
    std::vector<SamplePoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) pts.push_back({xs[i], ys[i]});
    return SampledFunction(std::move(pts), id);
}

Dataset to_dataset(const std::vector<std::vector<double>>& xs, const std::vector<std::vector<double>>& ys,
                   std::vector<double> targets, std::pair<double, double> domain) {
    if (xs.size() != ys.size()) throw ArgumentError("x and y lists differ in length");
    std::vector<SampledFunction> fs;
    for (std::size_t i = 0; i < xs.size(); ++i) fs.push_back(to_function(xs[i], ys[i], i));
    return Dataset(std::move(fs), std::move(targets), Domain{domain.first, domain.second});
}

// NaN marks a missing entry.
std::vector<MaskedVector> to_masked(const Eigen::MatrixXd& values) {
    std::vector<MaskedVector> out;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        Eigen::VectorXd v = values.row(i).transpose();
        std::vector<char> obs(static_cast<std::size_t>(v.size()));
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            obs[static_cast<std::size_t>(j)] = std::isnan(v[j]) ? 0 : 1;
            if (!obs[static_cast<std::size_t>(j)]) v[j] = 0.0;
        }
        out.emplace_back(std::move(v), std::move(obs));
    }
    return out;
}

py::dict report_dict(const ExperimentReport& r) {
    py::dict d;
    d["name"] = r.name;
    py::dict sel;
    for (const auto& [k, v] : r.selected) sel[py::str(k)] = v;
    d["selected"] = sel;
    d["cv_mse"] = r.cv_score;
    d["test_rmse"] = r.test_rmse;
    d["train_size"] = r.train_size;
    d["test_size"] = r.test_size;
    d["warnings"] = r.warnings;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Functional data regression with RBF networks and MLPs";

    const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&to_dataset), py::arg("xs"), py::arg("ys"), py::arg("targets"), py::arg("domain"))
        .def_property_readonly("size", &Dataset::size)
        .def_property_readonly("targets", &Dataset::targets)
        .def_property_readonly("domain", [](const Dataset& d) { return std::make_pair(d.domain().lo, d.domain().hi); })
        .def("curve",
             [](const Dataset& d, std::size_t i) {
                 const auto& f = d.functions().at(i);
                 return std::make_pair(f.xs(), f.ys());
             })
        .def("drop_random", [](const Dataset& d, double fraction, std::uint64_t seed) {
            return drop_random(d, fraction, seed);
        });

    m.def("load_dataset",
          [](const std::string& path, const std::string& format) { return load_dataset(path, parse_data_format(format)); },
          py::arg("path"), py::arg("format") = "tecator-grid");

    py::class_<Representation>(m, "Representation")
        .def_property_readonly("alpha", &Representation::alpha)
        .def_property_readonly("beta", &Representation::beta)
        .def_property_readonly("sse", &Representation::sse)
        .def("__call__", [](const Representation& r, const std::vector<double>& xs) { return r.evaluate(xs); })
        .def("derive", &derive, py::arg("order"))
        .def("center_reduce", &center_reduce);

    m.def(
        "fit",
        [](const std::vector<double>& xs, const std::vector<double>& ys, int size, const std::string& kind, int order,
           std::pair<double, double> domain) {
            const BasisPtr b = Basis::create(make_basis_spec(parse_kind(kind), {domain.first, domain.second}, order, size));
            return fit(to_function(xs, ys), b);
        },
        py::arg("x"), py::arg("y"), py::arg("size"), py::arg("kind") = "bspline", py::arg("order") = 4,
        py::arg("domain"));
    m.def(
        "loo_score",
        [](const std::vector<double>& xs, const std::vector<double>& ys, int size, const std::string& kind, int order,
           std::pair<double, double> domain) {
            return loo_score(to_function(xs, ys), make_basis_spec(parse_kind(kind), {domain.first, domain.second}, order, size));
        },
        py::arg("x"), py::arg("y"), py::arg("size"), py::arg("kind") = "bspline", py::arg("order") = 4,
        py::arg("domain"));
    m.def(
        "select_basis_size",
        [](const Dataset& d, const std::string& kind, int order, std::vector<int> sizes, unsigned threads) {
            const BasisKind k = parse_kind(kind);
            if (sizes.empty()) sizes = default_candidate_sizes(k, order, d.min_length());
            const BasisSelection s = select_basis_size(d, k, order, sizes, {}, threads);
            std::vector<std::tuple<int, double, bool>> scores;
            for (const auto& c : s.candidates) scores.emplace_back(c.size, c.total_loo, c.feasible);
            return std::make_pair(s.chosen, scores);
        },
        py::arg("data"), py::arg("kind") = "bspline", py::arg("order") = 4, py::arg("sizes") = std::vector<int>{},
        py::arg("threads") = 1);
    m.def("inner", &inner);
    m.def("dist", &dist);
    m.def(
        "distance",
        [](const Representation& a, const Representation& b, const std::string& metric) {
            return distance(a, b, {parse_semi_metric(metric)});
        },
        py::arg("a"), py::arg("b"), py::arg("metric") = "l2");

    py::class_<FpcaModel>(m, "PcaModel")
        .def_property_readonly("mean", &FpcaModel::mean)
        .def_property_readonly("components", &FpcaModel::components)
        .def_property_readonly("eigenvalues", &FpcaModel::eigenvalues)
        .def("explained_variance_ratio", &FpcaModel::explained_variance_ratio)
        .def("transform", &FpcaModel::transform, py::arg("rows"), py::arg("whiten") = false, py::arg("count") = -1);
    m.def(
        "fit_pca",
        [](const Eigen::MatrixXd& rows, int components, bool standardize) {
            return fit_fpca(rows, components, PcaOptions{standardize});
        },
        py::arg("rows"), py::arg("components") = -1, py::arg("standardize") = false);

    py::class_<RbfnModel>(m, "RbfnModel")
        .def_property_readonly("centers", &RbfnModel::centers)
        .def_property_readonly("weights", &RbfnModel::weights)
        .def_property_readonly("width", &RbfnModel::width)
        .def("predict", py::overload_cast<const Eigen::MatrixXd&>(&RbfnModel::predict, py::const_));
    py::class_<OlsPath>(m, "OlsPath")
        .def("__len__", &OlsPath::size)
        .def_readonly("selected", &OlsPath::selected)
        .def_readonly("regularized_error", &OlsPath::regularized_error)
        .def("model", &OlsPath::model, py::arg("centers"));
    m.def(
        "train_rbfn",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double width, double ridge, std::size_t max_centers) {
            return train_ols(x, y, width, ridge, max_centers);
        },
        py::arg("x"), py::arg("y"), py::arg("width"), py::arg("ridge") = 0.0, py::arg("max_centers") = 100);
    m.def("median_pairwise_distance", &median_pairwise_distance);

    py::class_<MlpModel>(m, "MlpModel")
        .def_property_readonly("parameters", py::overload_cast<>(&MlpModel::parameters, py::const_))
        .def_property_readonly("hidden", &MlpModel::hidden)
        .def("predict", py::overload_cast<const Eigen::MatrixXd&>(&MlpModel::forward, py::const_));
    m.def(
        "train_mlp",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int hidden, double decay, int restarts,
           std::uint64_t seed) {
            MlpTrainOptions o;
            o.restarts = restarts;
            o.seed = seed;
            MlpTrainResult r = train_mlp(x, y, hidden, decay, o);
            return std::make_pair(std::move(r.model), r.loss);
        },
        py::arg("x"), py::arg("y"), py::arg("hidden"), py::arg("decay") = 0.0, py::arg("restarts") = 60,
        py::arg("seed") = 0);

    m.def("mean_impute", [](const Eigen::MatrixXd& v) { return mean_impute(to_masked(v)); });
    m.def(
        "knn_impute", [](const Eigen::MatrixXd& v, int k) { return knn_impute(to_masked(v), k); }, py::arg("values"),
        py::arg("k"));
    m.def("expert_scale", [](const Eigen::VectorXd& v) {
        const MaskedVector s = expert_scale(to_masked(v.transpose())[0]);
        Eigen::VectorXd out = s.values;
        for (Eigen::Index j = 0; j < out.size(); ++j)
            if (!s.observed[static_cast<std::size_t>(j)]) out[j] = std::nan("");
        return out;
    });

    m.def("suite_names", &suite_names);
    m.def(
        "suite_configs",
        [](const std::string& table, const std::string& data, std::uint64_t seed) {
            SuiteOptions o;
            o.data_path = data;
            o.seed = seed;
            std::vector<std::string> out;
            for (const auto& s : suite_specs(table, o)) out.push_back(format_experiment_spec(s));
            return out;
        },
        py::arg("table"), py::arg("data"), py::arg("seed") = 1);
    m.def(
        "run_experiment",
        [](const std::string& config, unsigned threads) {
            std::istringstream in(config);
            const ExperimentSpec spec = parse_experiment_spec(in, "<config>");
            validate(spec);
            const PreparedData d = prepare_data(spec);
            SealedTestSet test(d.test);
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = run_experiment(spec, d.train, test, {threads});
            }
            return report_dict(r);
        },
        py::arg("config"), py::arg("threads") = 1);
}

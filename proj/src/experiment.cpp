#include "fdnn/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/fpca.hpp"
#include "fdnn/imputation.hpp"
#include "fdnn/mlp.hpp"
#include "fdnn/parallel.hpp"
#include "fdnn/random.hpp"
#include "fdnn/rbfn.hpp"
#include "fdnn/represent.hpp"
#include "fdnn/selection.hpp"

namespace fdnn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fmt6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& expected) {
    throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v, "an integer");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v, "a non-negative integer");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) bad(key, v, "a number");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string l = lower(v);
    if (l == "on" || l == "true" || l == "yes" || l == "1") return true;
    if (l == "off" || l == "false" || l == "no" || l == "0") return false;
    bad(key, v, "on|off");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// "1..6" or "1,2,4".
std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    if (const auto dots = v.find(".."); dots != std::string::npos) {
        const auto a = to_int(key, trim(v.substr(0, dots)));
        const auto b = to_int(key, trim(v.substr(dots + 2)));
        if (b < a) bad(key, v, "an increasing range");
        for (auto i = a; i <= b; ++i) out.push_back(static_cast<int>(i));
        return out;
    }
    for (const auto& s : split_list(v)) out.push_back(static_cast<int>(to_int(key, s)));
    if (out.empty()) bad(key, v, "a non-empty list");
    return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
    if (out.empty()) bad(key, v, "a non-empty list");
    return out;
}

std::optional<int> to_int_or_cv(const std::string& key, const std::string& v, const char* word) {
    if (lower(v) == word) return std::nullopt;
    return static_cast<int>(to_int(key, v));
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += fmt(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

std::string to_string(InputKind v) {
    switch (v) {
        case InputKind::Grid: return "grid";
        case InputKind::BSpline: return "bspline";
        case InputKind::Fourier: return "fourier";
    }
    return "?";
}

std::string to_string(Preproc v) {
    switch (v) {
        case Preproc::Raw: return "raw";
        case Preproc::CenterReduce: return "center-reduce";
        case Preproc::Deriv1: return "deriv1";
        case Preproc::Deriv2: return "deriv2";
    }
    return "?";
}

std::string to_string(ImputeKind v) {
    switch (v) {
        case ImputeKind::None: return "none";
        case ImputeKind::Mean: return "mean";
        case ImputeKind::Knn: return "knn";
    }
    return "?";
}

std::string to_string(PcaKind v) {
    switch (v) {
        case PcaKind::None: return "none";
        case PcaKind::Classical: return "classical";
        case PcaKind::Functional: return "functional";
    }
    return "?";
}

std::string to_string(ModelKind v) { return v == ModelKind::Rbfn ? "rbfn" : "mlp"; }
std::string to_string(SplitMode v) { return v == SplitMode::Fixed ? "fixed" : "random"; }

Preproc ExperimentSpec::effective_preproc() const {
    switch (metric) {
        case SemiMetricKind::Deriv1: return Preproc::Deriv1;
        case SemiMetricKind::Deriv2: return Preproc::Deriv2;
        case SemiMetricKind::L2: break;
    }
    return preproc;
}

void apply_setting(ExperimentSpec& s, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = lower(trim(raw_key));
    const std::string v = trim(raw_value);
    const std::string lv = lower(v);
    if (key == "name") {
        if (v.empty()) bad(key, v, "a non-empty name");
        s.name = v;
    } else if (key == "data") {
        s.data_path = v;
    } else if (key == "format") {
        try {
            s.format = parse_data_format(lv);
        } catch (const Error&) {
            bad(key, v, "tecator-grid|generic-pairs");
        }
    } else if (key == "test-size") {
        const auto n = to_int(key, v);
        if (n < 1) bad(key, v, "a positive integer");
        s.test_size = static_cast<std::size_t>(n);
    } else if (key == "split") {
        if (lv == "fixed") s.split = SplitMode::Fixed;
        else if (lv == "random") s.split = SplitMode::Random;
        else bad(key, v, "fixed|random");
    } else if (key == "seed") {
        s.seed = to_u64(key, v);
    } else if (key == "drop-fraction") {
        s.drop_fraction = to_double(key, v);
    } else if (key == "input") {
        if (lv == "grid") s.input = InputKind::Grid;
        else if (lv == "bspline") s.input = InputKind::BSpline;
        else if (lv == "fourier") s.input = InputKind::Fourier;
        else bad(key, v, "grid|bspline|fourier");
    } else if (key == "order") {
        s.order = static_cast<int>(to_int(key, v));
    } else if (key == "basis-size") {
        s.basis_size = to_int_or_cv(key, v, "loo");
    } else if (key == "preproc") {
        if (lv == "raw") s.preproc = Preproc::Raw;
        else if (lv == "center-reduce") s.preproc = Preproc::CenterReduce;
        else if (lv == "deriv1") s.preproc = Preproc::Deriv1;
        else if (lv == "deriv2") s.preproc = Preproc::Deriv2;
        else bad(key, v, "raw|center-reduce|deriv1|deriv2");
    } else if (key == "metric") {
        try {
            s.metric = parse_semi_metric(lv);
        } catch (const Error&) {
            bad(key, v, "l2|deriv1|deriv2");
        }
    } else if (key == "impute") {
        if (lv == "none") s.impute = ImputeKind::None;
        else if (lv == "mean") s.impute = ImputeKind::Mean;
        else if (lv == "knn") s.impute = ImputeKind::Knn;
        else bad(key, v, "none|mean|knn");
    } else if (key == "impute-k") {
        s.impute_k = to_int_or_cv(key, v, "cv");
    } else if (key == "impute-k-grid") {
        s.impute_k_grid = to_int_list(key, v);
    } else if (key == "expert-scale") {
        s.expert_scale = to_bool(key, v);
    } else if (key == "pca") {
        if (lv == "none") s.pca = PcaKind::None;
        else if (lv == "classical") s.pca = PcaKind::Classical;
        else if (lv == "functional") s.pca = PcaKind::Functional;
        else bad(key, v, "none|classical|functional");
    } else if (key == "pca-components") {
        s.pca_components = to_int_or_cv(key, v, "cv");
    } else if (key == "pca-max-components") {
        s.pca_max_components = static_cast<int>(to_int(key, v));
    } else if (key == "pca-standardize") {
        s.pca_standardize = to_bool(key, v);
    } else if (key == "whiten") {
        s.whiten = to_bool(key, v);
    } else if (key == "model") {
        if (lv == "rbfn") s.model = ModelKind::Rbfn;
        else if (lv == "mlp") s.model = ModelKind::Mlp;
        else bad(key, v, "rbfn|mlp");
    } else if (key == "cv-folds") {
        s.cv_folds = static_cast<int>(to_int(key, v));
    } else if (key == "max-centers") {
        s.max_centers = static_cast<int>(to_int(key, v));
    } else if (key == "width-grid") {
        s.width_grid = to_double_list(key, v);
    } else if (key == "ridge-grid") {
        s.ridge_grid = to_double_list(key, v);
    } else if (key == "hidden") {
        s.hidden_grid = to_int_list(key, v);
    } else if (key == "decay-grid") {
        s.decay_grid = to_double_list(key, v);
    } else if (key == "restarts") {
        s.restarts = static_cast<int>(to_int(key, v));
    } else if (key == "cv-restarts") {
        s.cv_restarts = static_cast<int>(to_int(key, v));
    } else if (key == "max-iterations") {
        s.max_iterations = static_cast<int>(to_int(key, v));
    } else {
        throw ConfigError("unknown setting '" + raw_key + "'");
    }
}

ExperimentSpec parse_experiment_spec(std::istream& in, const std::string& source) {
    ExperimentSpec spec;
    std::string line;
    std::size_t number = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(number) + ": expected key = value");
        const std::string key = lower(trim(line.substr(0, eq)));
        if (!seen.insert(key).second)
            throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
        try {
            apply_setting(spec, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_experiment_spec(in, path);
}

std::string format_experiment_spec(const ExperimentSpec& s) {
    std::ostringstream o;
    auto opt = [](const std::optional<int>& v, const char* word) { return v ? std::to_string(*v) : std::string(word); };
    o << "name = " << s.name << '\n'
      << "data = " << s.data_path << '\n'
      << "format = " << to_string(s.format) << '\n'
      << "test-size = " << s.test_size << '\n'
      << "split = " << to_string(s.split) << '\n'
      << "seed = " << s.seed << '\n'
      << "drop-fraction = " << fmt(s.drop_fraction) << '\n'
      << "input = " << to_string(s.input) << '\n'
      << "order = " << s.order << '\n'
      << "basis-size = " << opt(s.basis_size, "loo") << '\n'
      << "preproc = " << to_string(s.preproc) << '\n'
      << "metric = " << to_string(s.metric) << '\n'
      << "impute = " << to_string(s.impute) << '\n'
      << "impute-k = " << opt(s.impute_k, "cv") << '\n'
      << "impute-k-grid = " << join(s.impute_k_grid) << '\n'
      << "expert-scale = " << (s.expert_scale ? "on" : "off") << '\n'
      << "pca = " << to_string(s.pca) << '\n'
      << "pca-components = " << opt(s.pca_components, "cv") << '\n'
      << "pca-max-components = " << s.pca_max_components << '\n'
      << "pca-standardize = " << (s.pca_standardize ? "on" : "off") << '\n'
      << "whiten = " << (s.whiten ? "on" : "off") << '\n'
      << "model = " << to_string(s.model) << '\n'
      << "cv-folds = " << s.cv_folds << '\n'
      << "max-centers = " << s.max_centers << '\n'
      << "width-grid = " << join(s.width_grid) << '\n'
      << "ridge-grid = " << join(s.ridge_grid) << '\n'
      << "hidden = " << join(s.hidden_grid) << '\n'
      << "decay-grid = " << join(s.decay_grid) << '\n'
      << "restarts = " << s.restarts << '\n'
      << "cv-restarts = " << s.cv_restarts << '\n'
      << "max-iterations = " << s.max_iterations << '\n';
    return o.str();
}

void validate(const ExperimentSpec& s) {
    auto fail = [&](const std::string& what) { throw ConfigError(s.name + ": " + what); };
    if (s.name.empty()) fail("empty experiment name");
    if (!(s.drop_fraction >= 0.0 && s.drop_fraction < 1.0)) fail("drop-fraction must be in [0, 1)");
    if (s.cv_folds < 2) fail("cv-folds must be at least 2");

    const bool functional = s.input != InputKind::Grid;
    const Preproc pre = s.effective_preproc();
    if (s.metric != SemiMetricKind::L2) {
        if (s.model != ModelKind::Rbfn) fail("metric applies to rbfn models; use preproc for mlp");
        if (s.preproc != Preproc::Raw && s.preproc != pre)
            fail("metric " + to_string(s.metric) + " conflicts with preproc " + to_string(s.preproc));
    }
    if (!functional) {
        if (pre != Preproc::Raw) fail("preproc " + to_string(pre) + " needs a functional input (bspline or fourier)");
        if (s.pca == PcaKind::Functional) fail("functional PCA needs a functional input");
    } else {
        if (s.impute != ImputeKind::None) fail("imputation applies to grid input only");
        if (s.expert_scale) fail("expert scaling applies to grid input only");
        if (s.pca == PcaKind::Classical) fail("classical PCA applies to grid input; use pca = functional");
        if (s.basis_size && *s.basis_size < 1) fail("basis-size must be positive");
    }
    if (s.input == InputKind::BSpline) {
        if (s.order < 1) fail("spline order must be positive");
        const int d = pre == Preproc::Deriv1 ? 1 : pre == Preproc::Deriv2 ? 2 : 0;
        if (d >= s.order)
            fail(to_string(pre) + " needs a B-spline order above " + std::to_string(d) + " (got " +
                 std::to_string(s.order) + ")");
        if (s.basis_size && *s.basis_size < s.order) fail("basis-size must be at least the spline order");
    }
    if (s.input == InputKind::Fourier && (pre == Preproc::Deriv1 || pre == Preproc::Deriv2) && s.basis_size &&
        *s.basis_size % 2 == 0)
        fail("derivatives of a Fourier basis need an odd basis-size");

    if (s.impute == ImputeKind::Knn) {
        if (s.impute_k && *s.impute_k < 1) fail("impute-k must be positive");
        if (!s.impute_k && s.impute_k_grid.empty()) fail("impute-k-grid is empty");
        for (int k : s.impute_k_grid)
            if (k < 1) fail("impute-k-grid entries must be positive");
    }
    if (s.pca != PcaKind::None) {
        if (s.pca_components && *s.pca_components < 1) fail("pca-components must be positive");
        if (!s.pca_components && s.pca_max_components < 1) fail("pca-max-components must be positive");
    } else if (s.whiten) {
        fail("whitening needs a PCA stage");
    }

    if (s.model == ModelKind::Rbfn) {
        if (s.max_centers < 1) fail("max-centers must be positive");
        if (s.width_grid.empty() || s.ridge_grid.empty()) fail("empty rbfn grid");
        for (double w : s.width_grid)
            if (!(w > 0.0)) fail("width-grid entries must be positive");
        for (double r : s.ridge_grid)
            if (!(r >= 0.0)) fail("ridge-grid entries must be non-negative");
    } else {
        if (s.pca == PcaKind::None || !s.whiten) fail("mlp inputs are whitened PCA scores: set pca and whiten = on");
        if (s.hidden_grid.empty() || s.decay_grid.empty()) fail("empty mlp grid");
        for (int h : s.hidden_grid)
            if (h < 1) fail("hidden entries must be positive");
        for (double d : s.decay_grid)
            if (!(d >= 0.0)) fail("decay-grid entries must be non-negative");
        if (s.restarts < 1 || s.cv_restarts < 1) fail("restarts must be positive");
        if (s.max_iterations < 1) fail("max-iterations must be positive");
    }
}

// ---------------------------------------------------------------------------

std::string ExperimentReport::selected_string() const {
    std::string out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (i) out += ';';
        out += selected[i].first + '=' + selected[i].second;
    }
    return out;
}

std::string ExperimentReport::value(const std::string& key) const {
    for (const auto& [k, v] : selected)
        if (k == key) return v;
    return {};
}

PreparedData prepare_data(const ExperimentSpec& spec) {
    if (spec.data_path.empty()) throw ConfigError(spec.name + ": no data file given");
    return prepare_data(spec, load_dataset(spec.data_path, spec.format));
}

PreparedData prepare_data(const ExperimentSpec& spec, const Dataset& full) {
    const Dataset data =
        spec.drop_fraction > 0.0 ? drop_random(full, spec.drop_fraction, derive_seed(spec.seed, "holes")) : full;
    if (spec.test_size + static_cast<std::size_t>(spec.cv_folds) > data.size())
        throw ConfigError(spec.name + ": test-size " + std::to_string(spec.test_size) + " leaves too few of the " +
                          std::to_string(data.size()) + " samples for training");
    TrainTest tt = spec.split == SplitMode::Fixed ? split_fixed(data, spec.test_size)
                                                  : split(data, spec.test_size, derive_seed(spec.seed, "split"));
    return {std::move(tt.train), std::move(tt.test)};
}

namespace {

// Input features of every training sample, one matrix per imputation variant
// (the kNN neighbour count when it is cross-validated), and the recipe that
// maps unseen samples to the same features.
struct Features {
    std::vector<int> knn_k;
    std::vector<Eigen::MatrixXd> train;
    std::function<Eigen::MatrixXd(const Dataset&, std::size_t)> project;
    std::vector<std::pair<std::string, std::string>> selected;
    std::vector<std::string> warnings;
};

std::vector<double> common_grid(const Dataset& data) {
    std::set<double> xs;
    for (const auto& f : data.functions())
        for (const auto& p : f.points()) xs.insert(p.x);
    return {xs.begin(), xs.end()};
}

Features grid_features(const ExperimentSpec& spec, const Dataset& train) {
    Features out;
    const auto grid = std::make_shared<std::vector<double>>(common_grid(train));
    const bool expert = spec.expert_scale;
    auto masked_of = [grid, expert](const Dataset& d) {
        auto m = to_masked(d, *grid);
        if (expert)
            for (auto& x : m) x = expert_scale(x);
        return m;
    };
    auto train_masked = std::make_shared<std::vector<MaskedVector>>(masked_of(train));

    switch (spec.impute) {
        case ImputeKind::None: {
            for (std::size_t i = 0; i < train_masked->size(); ++i)
                if (!(*train_masked)[i].complete())
                    throw ValidationError("sample " + std::to_string(i) +
                                          " has missing grid values; choose an imputation method");
            out.knn_k = {0};
            out.train.push_back(mean_impute(*train_masked));
            out.project = [masked_of](const Dataset& d, std::size_t) {
                const auto m = masked_of(d);
                for (std::size_t i = 0; i < m.size(); ++i)
                    if (!m[i].complete())
                        throw ValidationError("sample " + std::to_string(i) + " has missing grid values");
                return mean_impute(m);
            };
            break;
        }
        case ImputeKind::Mean: {
            const Eigen::VectorXd means = observed_column_means(*train_masked);
            out.knn_k = {0};
            out.train.push_back(mean_impute(*train_masked));
            out.project = [masked_of, means](const Dataset& d, std::size_t) {
                const auto m = masked_of(d);
                Eigen::MatrixXd x(static_cast<Eigen::Index>(m.size()), means.size());
                for (std::size_t i = 0; i < m.size(); ++i)
                    x.row(static_cast<Eigen::Index>(i)) = fill_with(m[i], means).transpose();
                return x;
            };
            break;
        }
        case ImputeKind::Knn: {
            out.knn_k = spec.impute_k ? std::vector<int>{*spec.impute_k} : spec.impute_k_grid;
            for (int k : out.knn_k) {
                std::vector<std::string> w;
                out.train.push_back(knn_impute(*train_masked, k, &w));
                if (!w.empty())
                    out.warnings.push_back("k=" + std::to_string(k) + ": " + std::to_string(w.size()) +
                                           " imputed training values used fewer than k donors");
            }
            out.project = [masked_of, train_masked, ks = out.knn_k](const Dataset& d, std::size_t v) {
                const auto m = masked_of(d);
                Eigen::MatrixXd x(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.front().size()));
                for (std::size_t i = 0; i < m.size(); ++i)
                    x.row(static_cast<Eigen::Index>(i)) = knn_impute_one(m[i], *train_masked, ks[v]).values.transpose();
                return x;
            };
            break;
        }
    }
    return out;
}

Features functional_features(const ExperimentSpec& spec, const Dataset& train, unsigned threads) {
    Features out;
    const BasisKind kind = spec.input == InputKind::BSpline ? BasisKind::BSpline : BasisKind::Fourier;
    const Preproc pre = spec.effective_preproc();
    const int deriv = pre == Preproc::Deriv1 ? 1 : pre == Preproc::Deriv2 ? 2 : 0;

    int q = 0;
    if (spec.basis_size) {
        q = *spec.basis_size;
    } else {
        std::vector<int> sizes = default_candidate_sizes(kind, spec.order, train.min_length());
        if (kind == BasisKind::Fourier && deriv > 0)
            std::erase_if(sizes, [](int s) { return s % 2 == 0; });
        if (sizes.empty()) throw ValidationError("functions are too short for any candidate basis size");
        const BasisSelection sel = select_basis_size(train, kind, spec.order, sizes, {}, threads);
        q = sel.chosen;
        const auto infeasible = std::count_if(sel.candidates.begin(), sel.candidates.end(),
                                              [](const CandidateScore& c) { return !c.feasible; });
        if (infeasible > 0)
            out.warnings.push_back(std::to_string(infeasible) + " of " + std::to_string(sel.candidates.size()) +
                                   " candidate basis sizes were infeasible for some function");
    }
    const BasisPtr basis = Basis::create(make_basis_spec(kind, train.domain(), spec.order, q));
    out.selected.emplace_back("basis_size", std::to_string(q));
    if (deriv > 0) out.selected.emplace_back("coefficients", std::to_string(basis->derivative(deriv).basis->dimension()));

    auto features = [basis, pre, deriv](const Dataset& d) {
        Eigen::MatrixXd rows;
        for (std::size_t i = 0; i < d.size(); ++i) {
            Representation r = fit(d.function(i), basis);
            if (pre == Preproc::CenterReduce) r = center_reduce(r);
            else if (deriv > 0) r = derive(r, deriv);
            if (i == 0) rows.resize(static_cast<Eigen::Index>(d.size()), r.dimension());
            rows.row(static_cast<Eigen::Index>(i)) = r.beta().transpose();
        }
        return rows;
    };
    out.knn_k = {0};
    out.train.push_back(features(train));
    out.project = [features](const Dataset& d, std::size_t) { return features(d); };
    return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
    return out;
}

// Model inputs after the optional PCA stage, for one feature matrix split.
struct Projected {
    Eigen::MatrixXd fit;
    Eigen::MatrixXd apply;
    bool ok = true;
};

class PcaStage {
public:
    PcaStage(const ExperimentSpec& spec, const Eigen::MatrixXd& fit_rows, int components) : spec_(spec) {
        if (spec.pca == PcaKind::None) return;
        PcaOptions opt;
        opt.standardize = spec.pca == PcaKind::Classical && spec.pca_standardize;
        model_.emplace(fit_pca(fit_rows, components, opt));
    }

    // Returns false (leaving outputs untouched) when whitening hits a
    // degenerate component.
    bool transform(const Eigen::MatrixXd& rows, int count, Eigen::MatrixXd& out) const {
        if (!model_) {
            out = rows;
            return true;
        }
        try {
            out = model_->transform(rows, spec_.whiten, count);
        } catch (const DegenerateComponentError&) {
            return false;
        }
        return true;
    }

private:
    static FpcaModel fit_pca(const Eigen::MatrixXd& rows, int components, const PcaOptions& opt) {
        return fit_fpca(rows, components, opt);
    }
    const ExperimentSpec& spec_;
    std::optional<FpcaModel> model_;
};

struct Standardizer {
    double mean = 0.0;
    double scale = 1.0;
};

Standardizer standardizer(const Eigen::VectorXd& y) {
    Standardizer s;
    s.mean = y.mean();
    const double var = (y.array() - s.mean).square().mean();
    s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

double mean_sse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
    return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

// One cross-validated cell: its hyperparameters and its mean fold score.
struct Cell {
    std::size_t variant = 0;
    int components = 0;  // 0 = no PCA
    std::size_t a = 0;   // width / hidden index
    std::size_t b = 0;   // ridge / decay index
};

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& train, SealedTestSet& test,
                                const RunOptions& options) {
    validate(spec);
    const auto started = std::chrono::steady_clock::now();
    const unsigned threads = std::max(1u, options.threads);
    auto staged = [&](const char* stage, auto&& body) {
        try {
            return body();
        } catch (const ConfigError& e) {
            throw ConfigError(spec.name + " [" + stage + "]: " + e.what());
        } catch (const Error& e) {
            throw Error(spec.name + " [" + stage + "]: " + e.what());
        }
    };

    ExperimentReport report;
    report.name = spec.name;
    report.seed = spec.seed;
    report.split = to_string(spec.split);
    report.train_size = train.size();
    report.test_size = test.size();
    if (train.size() < static_cast<std::size_t>(spec.cv_folds))
        throw ConfigError(spec.name + ": fewer training samples than folds");

    Features feats = staged("features", [&] {
        return spec.input == InputKind::Grid ? grid_features(spec, train) : functional_features(spec, train, threads);
    });
    report.selected = feats.selected;
    report.warnings = feats.warnings;

    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.targets().data(),
                                                                static_cast<Eigen::Index>(train.size()));
    const FoldPlan plan = make_folds(train.size(), static_cast<std::size_t>(spec.cv_folds), derive_seed(spec.seed, "folds"));
    const std::size_t nfolds = plan.count();
    const Eigen::Index dim = feats.train.front().cols();

    std::size_t smallest_fit = train.size();
    for (std::size_t f = 0; f < nfolds; ++f) smallest_fit = std::min(smallest_fit, train.size() - plan.folds[f].size());

    std::vector<int> component_grid;
    if (spec.pca == PcaKind::None) {
        component_grid = {0};
    } else if (spec.pca_components) {
        if (*spec.pca_components > dim || static_cast<std::size_t>(*spec.pca_components) > smallest_fit)
            throw ValidationError(spec.name + ": pca-components " + std::to_string(*spec.pca_components) +
                                  " exceeds the input dimension or fold size");
        component_grid = {*spec.pca_components};
    } else {
        const int top = static_cast<int>(std::min<Eigen::Index>(
            {static_cast<Eigen::Index>(spec.pca_max_components), dim, static_cast<Eigen::Index>(smallest_fit) - 1}));
        for (int c = 1; c <= top; ++c) component_grid.push_back(c);
    }
    const int max_components = component_grid.back();

    const bool rbfn = spec.model == ModelKind::Rbfn;
    const std::size_t na = rbfn ? spec.width_grid.size() : spec.hidden_grid.size();
    const std::size_t nb = rbfn ? spec.ridge_grid.size() : spec.decay_grid.size();
    const std::size_t nv = feats.train.size();

    std::vector<Cell> cells;
    for (std::size_t v = 0; v < nv; ++v)
        for (int c : component_grid)
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t b = 0; b < nb; ++b) cells.push_back({v, c, a, b});
    const std::size_t per_cell = rbfn ? static_cast<std::size_t>(spec.max_centers) : 1;

    // Model inputs per (fold, variant, component count), fitted on the fold's
    // training part only.
    struct FoldInputs {
        Eigen::MatrixXd fit, val;
        Eigen::VectorXd yfit, yval;
        bool ok = true;
    };
    const std::size_t nc = component_grid.size();
    std::vector<FoldInputs> inputs(nfolds * nv * nc);
    auto slot = [&](std::size_t f, std::size_t v, std::size_t ci) { return (f * nv + v) * nc + ci; };
    staged("pca", [&] {
        parallel_for(nfolds * nv, threads, [&](std::size_t fv) {
            const std::size_t f = fv / nv, v = fv % nv;
            const auto tr = plan.training_indices(f);
            const auto& va = plan.validation_indices(f);
            const Eigen::MatrixXd xf = take_rows(feats.train[v], tr);
            const Eigen::MatrixXd xv = take_rows(feats.train[v], va);
            const PcaStage pca(spec, xf, spec.pca == PcaKind::None ? -1 : max_components);
            for (std::size_t ci = 0; ci < nc; ++ci) {
                FoldInputs& in = inputs[slot(f, v, ci)];
                in.yfit = take(y, tr);
                in.yval = take(y, va);
                const int count = component_grid[ci] == 0 ? -1 : component_grid[ci];
                in.ok = pca.transform(xf, count, in.fit) && pca.transform(xv, count, in.val);
            }
        });
        return 0;
    });

    // scores[(fold * cells + cell) * per_cell + k]: validation SSE / fold size.
    std::vector<double> scores(nfolds * cells.size() * per_cell, kNaN);
    std::vector<double> width_base(nfolds * nv * nc, kNaN);
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].ok && rbfn) width_base[i] = median_pairwise_distance(inputs[i].fit);

    staged("cross-validation", [&] {
        parallel_for(nfolds * cells.size(), threads, [&](std::size_t task) {
            const std::size_t f = task / cells.size(), ci_cell = task % cells.size();
            const Cell& cell = cells[ci_cell];
            const std::size_t ci = static_cast<std::size_t>(
                std::find(component_grid.begin(), component_grid.end(), cell.components) - component_grid.begin());
            const std::size_t s = slot(f, cell.variant, ci);
            const FoldInputs& in = inputs[s];
            if (!in.ok) return;
            double* out = &scores[task * per_cell];
            const double nval = static_cast<double>(in.yval.size());
            if (rbfn) {
                const double width = spec.width_grid[cell.a] * width_base[s];
                if (!(width > 0.0)) return;
                const OlsPath path = train_ols(in.fit, in.yfit, width, spec.ridge_grid[cell.b],
                                               static_cast<std::size_t>(spec.max_centers));
                const auto sse = path_validation_sse(path, in.val, in.yval, per_cell);
                for (std::size_t k = 0; k < per_cell; ++k) out[k] = sse[k] / nval;
            } else {
                const Standardizer st = standardizer(in.yfit);
                const Eigen::VectorXd ys = (in.yfit.array() - st.mean) / st.scale;
                MlpTrainOptions opt;
                opt.restarts = spec.cv_restarts;
                opt.seed = derive_seed(derive_seed(spec.seed, "cv-mlp", f), "cell", ci_cell);
                opt.lm.max_iterations = spec.max_iterations;
                try {
                    const MlpTrainResult res =
                        train_mlp(in.fit, ys, spec.hidden_grid[cell.a], spec.decay_grid[cell.b], opt);
                    const Eigen::VectorXd pred = (res.model.forward(in.val).array() * st.scale + st.mean).matrix();
                    out[0] = mean_sse(pred, in.yval);
                } catch (const TrainingError&) {
                }
            }
        });
        return 0;
    });

    // Mean over folds; a cell failing on any fold is out of the running.
    std::vector<double> mean_scores(cells.size() * per_cell, 0.0);
    for (std::size_t i = 0; i < mean_scores.size(); ++i) {
        double sum = 0.0;
        for (std::size_t f = 0; f < nfolds; ++f) sum += scores[f * mean_scores.size() + i];
        mean_scores[i] = sum / static_cast<double>(nfolds);
    }
    const std::size_t best = argmin_first(mean_scores);
    if (std::isnan(mean_scores[best])) throw SelectionError(spec.name + ": every grid cell failed cross-validation");
    const Cell win = cells[best / per_cell];
    const std::size_t centers = best % per_cell + 1;
    report.cv_score = mean_scores[best];

    // Refit on all training samples.
    if (spec.impute == ImputeKind::Knn) report.selected.emplace_back("k", std::to_string(feats.knn_k[win.variant]));
    const Eigen::MatrixXd& xall = feats.train[win.variant];
    const PcaStage pca = staged("refit", [&] { return PcaStage(spec, xall, win.components == 0 ? -1 : win.components); });
    Eigen::MatrixXd xin;
    if (!pca.transform(xall, win.components == 0 ? -1 : win.components, xin))
        throw DegenerateComponentError(spec.name + ": degenerate principal component on the full training set");
    if (spec.pca != PcaKind::None) report.selected.emplace_back("components", std::to_string(win.components));

    std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> predict;
    if (rbfn) {
        const double width = spec.width_grid[win.a] * median_pairwise_distance(xin);
        const double ridge = spec.ridge_grid[win.b];
        const OlsPath path = staged("refit", [&] { return train_ols(xin, y, width, ridge, centers); });
        const std::size_t used = std::min(centers, path.size());
        if (used < centers)
            report.warnings.push_back("final path stopped at " + std::to_string(used) + " centers");
        auto model = std::make_shared<RbfnModel>(path.model(used));
        report.selected.emplace_back("centers", std::to_string(used));
        report.selected.emplace_back("width_factor", fmt6(spec.width_grid[win.a]));
        report.selected.emplace_back("width", fmt6(width));
        report.selected.emplace_back("ridge", fmt6(ridge));
        predict = [model](const Eigen::MatrixXd& x) { return model->predict(x); };
    } else {
        const Standardizer st = standardizer(y);
        const Eigen::VectorXd ys = (y.array() - st.mean) / st.scale;
        MlpTrainOptions opt;
        opt.restarts = spec.restarts;
        opt.seed = derive_seed(spec.seed, "final-mlp");
        opt.lm.max_iterations = spec.max_iterations;
        const int hidden = spec.hidden_grid[win.a];
        const double decay = spec.decay_grid[win.b];
        const MlpTrainResult res = staged("refit", [&] { return train_mlp(xin, ys, hidden, decay, opt); });
        if (res.diverged > 0)
            report.warnings.push_back(std::to_string(res.diverged) + " final restarts diverged");
        auto model = std::make_shared<MlpModel>(res.model);
        report.selected.emplace_back("hidden", std::to_string(hidden));
        report.selected.emplace_back("decay", fmt6(decay));
        predict = [model, st](const Eigen::MatrixXd& x) {
            return Eigen::VectorXd((model->forward(x).array() * st.scale + st.mean).matrix());
        };
    }

    // Selection is finished; the held-out set is opened exactly once.
    report.test_accesses_before_final = test.accesses();
    if (report.test_accesses_before_final != 0)
        throw ContractError(spec.name + ": test set accessed before final evaluation");
    const Dataset& held_out = test.open();
    staged("test", [&] {
        const Eigen::MatrixXd xt = feats.project(held_out, win.variant);
        Eigen::MatrixXd zt;
        if (!pca.transform(xt, win.components == 0 ? -1 : win.components, zt))
            throw DegenerateComponentError("degenerate principal component");
        const Eigen::VectorXd pred = predict(zt);
        const Eigen::VectorXd yt = Eigen::Map<const Eigen::VectorXd>(held_out.targets().data(),
                                                                     static_cast<Eigen::Index>(held_out.size()));
        report.test_rmse = std::sqrt(mean_sse(pred, yt));
        return 0;
    });
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string rmse_text(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

std::string cv_text(double v) {
    std::ostringstream os;
    os << std::setprecision(8) << v;
    return os.str();
}

}  // namespace

void write_report_table(std::ostream& out, const std::vector<ExperimentReport>& reports) {
    std::size_t w0 = std::string("experiment").size(), w1 = std::string("selected").size();
    for (const auto& r : reports) {
        w0 = std::max(w0, r.name.size());
        w1 = std::max(w1, r.selected_string().size());
    }
    auto row = [&](const std::string& a, const std::string& b, const std::string& c) {
        out << std::left << std::setw(static_cast<int>(w0)) << a << "  " << std::setw(static_cast<int>(w1)) << b << "  "
            << std::right << std::setw(9) << c << '\n';
    };
    row("experiment", "selected", "test_rmse");
    out << std::string(w0 + w1 + 13, '-') << '\n';
    for (const auto& r : reports) row(r.name, r.selected_string(), rmse_text(r.test_rmse));
}

void write_report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
    out << "experiment,selected_params,cv_mse,test_rmse\n";
    for (const auto& r : reports)
        out << r.name << ',' << r.selected_string() << ',' << cv_text(r.cv_score) << ',' << rmse_text(r.test_rmse) << '\n';
}

void write_timings_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
    out << "experiment,wall_seconds\n";
    for (const auto& r : reports) out << r.name << ',' << std::fixed << std::setprecision(3) << r.wall_seconds << '\n';
}

// ---------------------------------------------------------------------------

std::vector<std::string> suite_names() { return {"table1", "table2", "table3", "table3-mlp", "table4", "table5"}; }

namespace {

ExperimentSpec base_spec(const SuiteOptions& o, const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    s.data_path = o.data_path;
    s.seed = o.seed;
    return s;
}

ExperimentSpec spline(ExperimentSpec s, int order, Preproc pre) {
    s.input = InputKind::BSpline;
    s.order = order;
    s.preproc = pre;
    return s;
}

ExperimentSpec with_pca(ExperimentSpec s, PcaKind kind, std::optional<int> components, bool whiten) {
    s.pca = kind;
    s.pca_components = components;
    s.whiten = whiten;
    return s;
}

ExperimentSpec mlp(ExperimentSpec s) {
    s.model = ModelKind::Mlp;
    s.whiten = true;
    return s;
}

std::vector<ExperimentSpec> table1(const SuiteOptions& o) {
    return {
        base_spec(o, "t1-01-grid"),
        with_pca(base_spec(o, "t1-02-pca20"), PcaKind::Classical, 20, false),
        with_pca(base_spec(o, "t1-03-pca-cv"), PcaKind::Classical, std::nullopt, false),
        with_pca(base_spec(o, "t1-04-pca-cv-whiten"), PcaKind::Classical, std::nullopt, true),
        spline(base_spec(o, "t1-05-spline4"), 4, Preproc::Raw),
        with_pca(spline(base_spec(o, "t1-06-spline4-fpca20"), 4, Preproc::Raw), PcaKind::Functional, 20, false),
        with_pca(spline(base_spec(o, "t1-07-spline4-fpca-cv-whiten"), 4, Preproc::Raw), PcaKind::Functional,
                 std::nullopt, true),
        spline(base_spec(o, "t1-08-spline4-center-reduce"), 4, Preproc::CenterReduce),
        spline(base_spec(o, "t1-09-spline5-deriv1"), 5, Preproc::Deriv1),
        spline(base_spec(o, "t1-10-spline6-deriv2"), 6, Preproc::Deriv2),
    };
}

std::vector<ExperimentSpec> table2(const SuiteOptions& o) {
    auto fpca = [](ExperimentSpec s) { return mlp(with_pca(std::move(s), PcaKind::Functional, std::nullopt, true)); };
    return {
        mlp(with_pca(base_spec(o, "t2-01-pca"), PcaKind::Classical, std::nullopt, true)),
        fpca(spline(base_spec(o, "t2-02-spline4-fpca"), 4, Preproc::Raw)),
        fpca(spline(base_spec(o, "t2-03-spline4-center-reduce-fpca"), 4, Preproc::CenterReduce)),
        fpca(spline(base_spec(o, "t2-04-spline5-deriv1-fpca"), 5, Preproc::Deriv1)),
        fpca(spline(base_spec(o, "t2-05-spline6-deriv2-fpca"), 6, Preproc::Deriv2)),
    };
}

ExperimentSpec holes(ExperimentSpec s, const SuiteOptions& o) {
    s.drop_fraction = o.drop_fraction;
    return s;
}

ExperimentSpec imputed(ExperimentSpec s, ImputeKind kind, bool expert) {
    s.impute = kind;
    s.expert_scale = expert;
    return mlp(with_pca(std::move(s), PcaKind::Classical, std::nullopt, true));
}

}  // namespace

std::vector<ExperimentSpec> suite_specs(const std::string& table, const SuiteOptions& o) {
    std::vector<ExperimentSpec> out;
    if (table == "table1") {
        out = table1(o);
    } else if (table == "table2") {
        out = table2(o);
    } else if (table == "table3") {
        const auto t1 = table1(o);
        out = {holes(t1[8], o), holes(t1[9], o)};
        out[0].name = "t3-09-spline5-deriv1-holes";
        out[1].name = "t3-10-spline6-deriv2-holes";
    } else if (table == "table3-mlp") {
        const auto t2 = table2(o);
        out = {holes(t2[1], o), holes(t2[2], o)};
        out[0].name = "t3m-02-spline4-fpca-holes";
        out[1].name = "t3m-03-spline4-center-reduce-fpca-holes";
    } else if (table == "table4") {
        out = {holes(imputed(base_spec(o, "t4-01-mean-impute-pca"), ImputeKind::Mean, false), o),
               holes(imputed(base_spec(o, "t4-02-knn-impute-pca"), ImputeKind::Knn, false), o)};
    } else if (table == "table5") {
        out = {holes(imputed(base_spec(o, "t5-01-expert-mean-impute-pca"), ImputeKind::Mean, true), o),
               holes(imputed(base_spec(o, "t5-02-expert-knn-impute-pca"), ImputeKind::Knn, true), o)};
    } else {
        std::string known;
        for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown suite '" + table + "' (known: " + known + ")");
    }
    for (const auto& s : out) validate(s);
    return out;
}

}  // namespace fdnn

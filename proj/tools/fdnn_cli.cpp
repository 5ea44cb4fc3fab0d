// fdnn: functional preprocessing and neural regression on sampled curves.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/experiment.hpp"
#include "fdnn/fpca.hpp"
#include "fdnn/random.hpp"
#include "fdnn/represent.hpp"
#include "fdnn/transforms.hpp"

#ifndef FDNN_VERSION
#define FDNN_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace fdnn;

namespace {

std::string default_data_path() {
    if (const char* dir = std::getenv("FDNN_DATA_DIR"); dir && *dir) return (fs::path(dir) / "tecator.txt").string();
    return "data/tecator.txt";
}

// Writes through a temporary file so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

std::vector<std::string> spec_keys() {
    std::vector<std::string> keys;
    std::istringstream in(format_experiment_spec(ExperimentSpec{}));
    std::string line;
    while (std::getline(in, line)) keys.push_back(line.substr(0, line.find(' ')));
    return keys;
}

nlohmann::json manifest(const std::string& command, const std::string& config, const fs::path& out,
                        const std::vector<ExperimentSpec>& specs) {
    nlohmann::json m;
    m["toolkit"] = "fdnn";
    m["version"] = FDNN_VERSION;
    m["command"] = command;
    m["config"] = config;
    m["output_dir"] = out.string();
    for (const auto& s : specs) {
        nlohmann::json row;
        row["name"] = s.name;
        row["master_seed"] = s.seed;
        row["seeds"] = {{"holes", derive_seed(s.seed, "holes")},
                        {"split", derive_seed(s.seed, "split")},
                        {"folds", derive_seed(s.seed, "folds")},
                        {"final_mlp", derive_seed(s.seed, "final-mlp")}};
        row["spec"] = format_experiment_spec(s);
        m["rows"].push_back(row);
    }
    return m;
}

void emit_reports(const fs::path& out, const std::vector<ExperimentReport>& reports) {
    write_atomic(out / "report.txt", render([&](std::ostream& o) { write_report_table(o, reports); }));
    write_atomic(out / "report.csv", render([&](std::ostream& o) { write_report_csv(o, reports); }));
    write_atomic(out / "timings.csv", render([&](std::ostream& o) { write_timings_csv(o, reports); }));
    std::string warnings;
    for (const auto& r : reports)
        for (const auto& w : r.warnings) warnings += r.name + ": " + w + "\n";
    write_atomic(out / "warnings.txt", warnings);
}

std::vector<ExperimentReport> run_rows(const std::vector<ExperimentSpec>& specs, const fs::path& out, unsigned threads) {
    for (const auto& s : specs) validate(s);
    std::vector<ExperimentReport> reports;
    for (const auto& s : specs) {
        std::cerr << "[" << s.name << "] running\n";
        PreparedData data = prepare_data(s);
        SealedTestSet test(std::move(data.test));
        reports.push_back(run_experiment(s, data.train, test, {threads}));
        const auto& r = reports.back();
        char tail[64];
        std::snprintf(tail, sizeof tail, " test_rmse=%.4f (%.1f s)\n", r.test_rmse, r.wall_seconds);
        std::cerr << "[" << s.name << "] " << r.selected_string() << tail;
        write_atomic(out / "rows" / (s.name + ".cfg"), format_experiment_spec(s));
        emit_reports(out, reports);
    }
    return reports;
}

// ---------------------------------------------------------------------------

struct RepresentArgs {
    std::string data;
    std::string format = "tecator-grid";
    std::string basis = "bspline";
    int order = 4;
    std::string size = "loo";
    double drop = 0.0;
    std::uint64_t seed = 1;
    std::string out = "runs/represent";
    bool curves = false;
    unsigned threads = 1;
};

void write_curve_files(const fs::path& dir, const Dataset& data, const BasisPtr& basis,
                       const std::vector<Representation>& reps) {
    const Domain dom = basis->domain();
    std::vector<double> dense(401);
    for (std::size_t i = 0; i < dense.size(); ++i)
        dense[i] = dom.lo + (dom.hi - dom.lo) * static_cast<double>(i) / static_cast<double>(dense.size() - 1);
    write_atomic(dir / "samples.csv", render([&](std::ostream& o) {
                     o << "id,x,y\n" << std::setprecision(10);
                     for (const auto& f : data.functions())
                         for (const auto& p : f.points()) o << f.id() << ',' << p.x << ',' << p.y << '\n';
                 }));
    auto curve = [&](const std::string& file, int s) {
        write_atomic(dir / file, render([&](std::ostream& o) {
                         o << "id,x,value\n" << std::setprecision(10);
                         for (std::size_t i = 0; i < reps.size(); ++i) {
                             const Representation r = s == 0 ? reps[i] : derive(reps[i], s);
                             const Eigen::VectorXd v = r.evaluate(dense);
                             for (std::size_t j = 0; j < dense.size(); ++j)
                                 o << data.function(i).id() << ',' << dense[j] << ',' << v[static_cast<Eigen::Index>(j)] << '\n';
                         }
                     }));
    };
    curve("fit.csv", 0);
    const int order = basis->spec().order();
    for (int s = 1; s <= 2; ++s) {
        if (basis->spec().kind() == BasisKind::BSpline && s >= order) break;
        if (basis->spec().kind() == BasisKind::Fourier && basis->dimension() % 2 == 0) break;
        curve("deriv" + std::to_string(s) + ".csv", s);
    }
    const FpcaModel pca = fit_fpca(beta_matrix(reps), -1, {}, basis);
    const Eigen::VectorXd ratio = pca.explained_variance_ratio();
    write_atomic(dir / "pca_variance.csv", render([&](std::ostream& o) {
                     o << "component,eigenvalue,ratio,cumulative\n" << std::setprecision(10);
                     double cum = 0.0;
                     for (Eigen::Index j = 0; j < ratio.size(); ++j) {
                         cum += ratio[j];
                         o << j + 1 << ',' << pca.eigenvalues()[j] << ',' << ratio[j] << ',' << cum << '\n';
                     }
                 }));
}

int cmd_represent(const RepresentArgs& a) {
    const DataFormat format = parse_data_format(a.format);
    Dataset data = load_dataset(a.data.empty() ? default_data_path() : a.data, format);
    if (a.drop > 0.0) data = drop_random(data, a.drop, derive_seed(a.seed, "holes"));
    const BasisKind kind = a.basis == "fourier" ? BasisKind::Fourier : BasisKind::BSpline;
    if (a.basis != "fourier" && a.basis != "bspline") throw ConfigError("--basis must be bspline or fourier");

    const fs::path out(a.out);
    int q = 0;
    if (a.size == "loo") {
        const auto sizes = default_candidate_sizes(kind, a.order, data.min_length());
        const BasisSelection sel = select_basis_size(data, kind, a.order, sizes, {}, a.threads);
        q = sel.chosen;
        write_atomic(out / "loo.csv", render([&](std::ostream& o) {
                         o << "size,feasible,total_loo,failures,reason\n" << std::setprecision(12);
                         for (const auto& c : sel.candidates)
                             o << c.size << ',' << (c.feasible ? 1 : 0) << ',' << c.total_loo << ',' << c.failures << ",\""
                               << c.reason << "\"\n";
                     }));
    } else {
        q = std::stoi(a.size);
    }
    const BasisPtr basis = Basis::create(make_basis_spec(kind, data.domain(), a.order, q));
    std::vector<Representation> reps;
    reps.reserve(data.size());
    for (const auto& f : data.functions()) reps.push_back(fit(f, basis));

    write_atomic(out / "coefficients.csv", render([&](std::ostream& o) {
                     o << "id,target";
                     for (int j = 0; j < q; ++j) o << ",alpha_" << j + 1;
                     for (int j = 0; j < q; ++j) o << ",beta_" << j + 1;
                     o << '\n' << std::setprecision(17);
                     for (std::size_t i = 0; i < reps.size(); ++i) {
                         o << data.function(i).id() << ',' << data.target(i);
                         for (double v : reps[i].alpha()) o << ',' << v;
                         for (double v : reps[i].beta()) o << ',' << v;
                         o << '\n';
                     }
                 }));
    // Fitted values at the sample points, in the generic-pairs carrier.
    std::vector<SampledFunction> fitted;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        std::vector<SamplePoint> pts;
        for (const auto& p : data.function(i).points()) pts.push_back({p.x, reps[i](p.x)});
        fitted.emplace_back(std::move(pts), data.function(i).id());
    }
    write_atomic(out / "reconstruction.txt",
                 render([&](std::ostream& o) { write_generic_pairs(o, Dataset(fitted, data.targets(), data.domain())); }));
    if (a.curves) write_curve_files(out / "curves", data, basis, reps);

    std::cout << "basis " << a.basis << " order " << a.order << ": selected size " << q << " ("
              << (a.size == "loo" ? "leave-one-out" : "fixed") << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional preprocessing and neural regression for sampled curves"};
    app.set_version_flag("--version", std::string(FDNN_VERSION));
    app.require_subcommand(1);

    RepresentArgs rep;
    auto* represent = app.add_subcommand("represent", "Fit basis coordinates; select the basis size by leave-one-out");
    represent->add_option("--data", rep.data, "Data file (default: $FDNN_DATA_DIR/tecator.txt)");
    represent->add_option("--format", rep.format, "tecator-grid | generic-pairs");
    represent->add_option("--basis", rep.basis, "bspline | fourier");
    represent->add_option("--order", rep.order, "B-spline order");
    represent->add_option("--basis-size", rep.size, "Basis size or 'loo'");
    represent->add_option("--drop-fraction", rep.drop, "Remove this fraction of every curve's samples first");
    represent->add_option("--seed", rep.seed, "Master seed");
    represent->add_option("--out", rep.out, "Output directory");
    represent->add_flag("--curves", rep.curves, "Also write plot-ready curve files");
    represent->add_option("--threads", rep.threads, "Worker threads");

    std::string config, exp_out, exp_data;
    unsigned threads = 1;
    std::vector<std::string> sets;
    auto* experiment = app.add_subcommand("experiment", "Run one experiment row");
    experiment->add_option("--config", config, "Experiment config (key = value lines)");
    experiment->add_option("--out", exp_out, "Output directory (default: runs/<name>)");
    experiment->add_option("--threads", threads, "Worker threads");
    experiment->add_option("--set", sets, "Override a setting, key=value");
    // Every config key is also a flag.
    std::map<std::string, std::string> flag_values;
    for (const auto& key : spec_keys()) experiment->add_option("--" + key, flag_values[key], "config key " + key);

    std::string table, suite_out, suite_data;
    std::uint64_t suite_seed = 1;
    double suite_drop = 0.1;
    std::vector<std::string> suite_sets;
    auto* suite = app.add_subcommand("suite", "Run every row of an experiment table");
    suite->add_option("--table", table, "table1 | table2 | table3 | table3-mlp | table4 | table5")->required();
    suite->add_option("--data", suite_data, "Data file (default: $FDNN_DATA_DIR/tecator.txt)");
    suite->add_option("--seed", suite_seed, "Master seed");
    suite->add_option("--drop-fraction", suite_drop, "Fraction removed for the missing-data tables");
    suite->add_option("--out", suite_out, "Output directory (default: runs/<table>)");
    suite->add_option("--threads", threads, "Worker threads");
    suite->add_option("--set", suite_sets, "Override a setting on every row, key=value");
    suite->add_flag("--list", "Print the row configs and exit");

    std::string holes_data, holes_format = "tecator-grid", holes_out;
    double holes_fraction = 0.1;
    std::uint64_t holes_seed = 1;
    auto* make_holes = app.add_subcommand("make-holes", "Remove a random fraction of every curve's samples");
    make_holes->add_option("--data", holes_data, "Data file (default: $FDNN_DATA_DIR/tecator.txt)");
    make_holes->add_option("--format", holes_format, "tecator-grid | generic-pairs");
    make_holes->add_option("--drop-fraction", holes_fraction, "Fraction of samples removed per curve");
    make_holes->add_option("--seed", holes_seed, "Master seed");
    make_holes->add_option("--out", holes_out, "Output file (generic-pairs)")->required();

    CLI11_PARSE(app, argc, argv);

    auto apply_sets = [](ExperimentSpec& s, const std::vector<std::string>& kv) {
        for (const auto& item : kv) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + item + "'");
            apply_setting(s, item.substr(0, eq), item.substr(eq + 1));
        }
    };

    try {
        if (represent->parsed()) return cmd_represent(rep);

        if (experiment->parsed()) {
            ExperimentSpec spec = config.empty() ? ExperimentSpec{} : load_experiment_spec(config);
            for (const auto& [key, value] : flag_values)
                if (experiment->count("--" + key) > 0) apply_setting(spec, key, value);
            apply_sets(spec, sets);
            if (spec.data_path.empty()) spec.data_path = default_data_path();
            validate(spec);
            const fs::path out = exp_out.empty() ? fs::path("runs") / spec.name : fs::path(exp_out);
            write_atomic(out / "manifest.json", manifest("experiment", config, out, {spec}).dump(2) + "\n");
            const auto reports = run_rows({spec}, out, threads);
            write_report_table(std::cout, reports);
            return 0;
        }

        if (suite->parsed()) {
            SuiteOptions opt;
            opt.data_path = suite_data.empty() ? default_data_path() : suite_data;
            opt.seed = suite_seed;
            opt.drop_fraction = suite_drop;
            auto specs = suite_specs(table, opt);
            for (auto& s : specs) {
                apply_sets(s, suite_sets);
                validate(s);
            }
            if (suite->count("--list") > 0) {
                for (const auto& s : specs) std::cout << format_experiment_spec(s) << '\n';
                return 0;
            }
            const fs::path out = suite_out.empty() ? fs::path("runs") / table : fs::path(suite_out);
            write_atomic(out / "manifest.json", manifest("suite " + table, "", out, specs).dump(2) + "\n");
            const auto reports = run_rows(specs, out, threads);
            write_report_table(std::cout, reports);
            return 0;
        }

        if (make_holes->parsed()) {
            const Dataset data = load_dataset(holes_data.empty() ? default_data_path() : holes_data,
                                              parse_data_format(holes_format));
            const Dataset holes = drop_random(data, holes_fraction, derive_seed(holes_seed, "holes"));
            write_atomic(holes_out, render([&](std::ostream& o) { write_generic_pairs(o, holes); }));
            std::cout << "wrote " << holes.size() << " curves to " << holes_out << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/experiment.hpp"
#include "fdnn/selection.hpp"
#include "../support/oracles.hpp"

using namespace fdnn;

namespace {

ExperimentSpec small_rbfn() {
    ExperimentSpec s;
    s.name = "small";
    s.input = InputKind::BSpline;
    s.order = 5;
    s.preproc = Preproc::Deriv1;
    s.max_centers = 20;
    s.width_grid = {0.5, 1.0, 2.0};
    s.ridge_grid = {1e-6, 1e-3};
    return s;
}

ExperimentSpec small_mlp() {
    ExperimentSpec s;
    s.name = "small-mlp";
    s.pca = PcaKind::Classical;
    s.pca_max_components = 3;
    s.whiten = true;
    s.model = ModelKind::Mlp;
    s.hidden_grid = {1, 2};
    s.decay_grid = {1e-3, 1e-1};
    s.restarts = 3;
    s.cv_restarts = 1;
    return s;
}

PreparedData synthetic(const ExperimentSpec& s, std::size_t n = 60) {
    ExperimentSpec copy = s;
    copy.test_size = 15;
    return prepare_data(copy, synth::curves(n, 40, 21, 0.05));
}

}  // namespace

TEST_CASE("config text round-trips") {
    ExperimentSpec s = small_mlp();
    s.data_path = "data/x.txt";
    s.basis_size = 12;
    s.impute = ImputeKind::Knn;
    s.impute_k = std::nullopt;
    s.ridge_grid = {1e-6, 0.25};
    s.seed = 123456789012345ULL;
    std::istringstream in(format_experiment_spec(s));
    CHECK(parse_experiment_spec(in) == s);
}

TEST_CASE("config parsing") {
    std::istringstream in("# row\nname = demo\nmodel = mlp   # trailing\nhidden = 1..4\npca = classical\n"
                          "pca-components = cv\nwhiten = on\nmetric = l2\n");
    const ExperimentSpec s = parse_experiment_spec(in, "demo.cfg");
    CHECK(s.name == "demo");
    CHECK(s.hidden_grid == std::vector<int>{1, 2, 3, 4});
    CHECK(!s.pca_components);
    CHECK_NOTHROW(validate(s));

    std::istringstream unknown("colour = red\n");
    CHECK_THROWS_AS(parse_experiment_spec(unknown), ConfigError);
    std::istringstream dup("seed = 1\nseed = 2\n");
    CHECK_THROWS_AS(parse_experiment_spec(dup), ConfigError);
    std::istringstream bad("order = four\n");
    try {
        parse_experiment_spec(bad, "row.cfg");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("row.cfg:1") != std::string::npos);
    }
}

TEST_CASE("incompatible stages are config errors") {
    ExperimentSpec s;
    s.preproc = Preproc::Deriv1;  // grid input
    CHECK_THROWS_AS(validate(s), ConfigError);

    s = ExperimentSpec{};
    s.input = InputKind::BSpline;
    s.order = 2;
    s.preproc = Preproc::Deriv2;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.order = 3;
    CHECK_NOTHROW(validate(s));

    s = ExperimentSpec{};
    s.model = ModelKind::Mlp;
    CHECK_THROWS_AS(validate(s), ConfigError);  // mlp without whitened PCA

    s = ExperimentSpec{};
    s.input = InputKind::BSpline;
    s.impute = ImputeKind::Mean;
    CHECK_THROWS_AS(validate(s), ConfigError);

    s = ExperimentSpec{};
    s.whiten = true;
    CHECK_THROWS_AS(validate(s), ConfigError);

    s = ExperimentSpec{};
    s.input = InputKind::BSpline;
    s.order = 5;
    s.metric = SemiMetricKind::Deriv1;
    s.preproc = Preproc::Deriv2;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.preproc = Preproc::Raw;
    CHECK(s.effective_preproc() == Preproc::Deriv1);
    CHECK_NOTHROW(validate(s));

    s = ExperimentSpec{};
    s.input = InputKind::Fourier;
    s.basis_size = 8;
    s.preproc = Preproc::Deriv1;
    CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("config errors come before any computation") {
    ExperimentSpec s = small_rbfn();
    s.width_grid.clear();
    const PreparedData d = synthetic(small_rbfn());
    SealedTestSet test(d.test);
    CHECK_THROWS_AS(run_experiment(s, d.train, test), ConfigError);
    CHECK(test.accesses() == 0);
}

TEST_CASE("suites have the table layouts") {
    SuiteOptions o;
    o.data_path = "x";
    CHECK(suite_specs("table1", o).size() == 10);
    CHECK(suite_specs("table2", o).size() == 5);
    const auto t3 = suite_specs("table3", o);
    REQUIRE(t3.size() == 2);
    CHECK(t3[0].drop_fraction == 0.1);
    CHECK(t3[1].effective_preproc() == Preproc::Deriv2);
    CHECK(t3[1].order == 6);
    CHECK(suite_specs("table3-mlp", o).size() == 2);
    CHECK(suite_specs("table4", o)[1].impute == ImputeKind::Knn);
    CHECK(suite_specs("table5", o)[0].expert_scale);
    CHECK(suite_specs("table1", o)[3].whiten);
    CHECK_THROWS_AS(suite_specs("table9", o), ConfigError);
}

TEST_CASE("rbfn experiment keeps the test set sealed until the end") {
    const ExperimentSpec s = small_rbfn();
    const PreparedData d = synthetic(s);
    SealedTestSet test(d.test);
    const ExperimentReport r = run_experiment(s, d.train, test);
    CHECK(r.test_accesses_before_final == 0);
    CHECK(test.accesses() == 1);
    CHECK(r.train_size == 45);
    CHECK(r.test_size == 15);
    CHECK(!r.value("basis_size").empty());
    CHECK(!r.value("centers").empty());
    CHECK(r.value("coefficients") == std::to_string(std::stoi(r.value("basis_size")) - 1));
    CHECK(std::isfinite(r.test_rmse));
    CHECK(r.cv_score > 0.0);
}

TEST_CASE("selection does not depend on the test set") {
    const ExperimentSpec s = small_rbfn();
    const PreparedData d = synthetic(s);
    SealedTestSet a(d.test);
    std::vector<double> other(d.test.size(), 1000.0);
    SealedTestSet b(Dataset(d.test.functions(), other, d.test.domain()));
    const ExperimentReport ra = run_experiment(s, d.train, a);
    const ExperimentReport rb = run_experiment(s, d.train, b);
    CHECK(ra.selected == rb.selected);
    CHECK(ra.cv_score == rb.cv_score);
    CHECK(ra.test_rmse != rb.test_rmse);
}

TEST_CASE("reports are reproducible and thread-count independent") {
    for (const ExperimentSpec& s : {small_rbfn(), small_mlp()}) {
        const PreparedData d = synthetic(s);
        std::vector<std::string> csv;
        for (unsigned threads : {1u, 1u, 3u}) {
            SealedTestSet test(d.test);
            std::ostringstream out;
            write_report_csv(out, {run_experiment(s, d.train, test, {threads})});
            csv.push_back(out.str());
        }
        CHECK(csv[0] == csv[1]);
        CHECK(csv[0] == csv[2]);
    }
}

TEST_CASE("mlp experiment selects inside the grid") {
    const ExperimentSpec s = small_mlp();
    const PreparedData d = synthetic(s);
    SealedTestSet test(d.test);
    const ExperimentReport r = run_experiment(s, d.train, test);
    const int c = std::stoi(r.value("components"));
    CHECK(c >= 1);
    CHECK(c <= 3);
    const int h = std::stoi(r.value("hidden"));
    CHECK((h == 1 || h == 2));
    CHECK(r.test_rmse < 3.0);
}

TEST_CASE("missing data pipelines") {
    ExperimentSpec knn = small_mlp();
    knn.drop_fraction = 0.1;
    knn.impute = ImputeKind::Knn;
    knn.impute_k_grid = {1, 4};
    knn.expert_scale = true;
    const PreparedData d = synthetic(knn);
    SealedTestSet test(d.test);
    const ExperimentReport r = run_experiment(knn, d.train, test);
    CHECK((r.value("k") == "1" || r.value("k") == "4"));

    ExperimentSpec grid_only = small_rbfn();
    grid_only.input = InputKind::Grid;
    grid_only.preproc = Preproc::Raw;
    grid_only.drop_fraction = 0.1;
    const PreparedData h = synthetic(grid_only);
    SealedTestSet t2(h.test);
    CHECK_THROWS_AS(run_experiment(grid_only, h.train, t2), Error);

    ExperimentSpec functional = small_rbfn();
    functional.drop_fraction = 0.1;
    const PreparedData f = synthetic(functional);
    SealedTestSet t3(f.test);
    CHECK_NOTHROW(run_experiment(functional, f.train, t3));
}

TEST_CASE("report files") {
    ExperimentReport r;
    r.name = "row";
    r.selected = {{"basis_size", "48"}, {"centers", "12"}};
    r.cv_score = 0.5;
    r.test_rmse = 0.81234;
    r.wall_seconds = 3.25;
    std::ostringstream csv, table, times;
    write_report_csv(csv, {r});
    write_report_table(table, {r});
    write_timings_csv(times, {r});
    CHECK(csv.str() == "experiment,selected_params,cv_mse,test_rmse\nrow,basis_size=48;centers=12,0.5,0.8123\n");
    CHECK(table.str().find("0.8123") != std::string::npos);
    CHECK(times.str().find("3.250") != std::string::npos);
}

TEST_CASE("constant-mean predictor error is the spread around the training mean") {
    const std::vector<double> train{1.0, 2.0, 6.0};
    const std::vector<double> test{0.0, 4.0, 5.0, 7.0};
    const double mu = 3.0;
    double ss = 0.0;
    for (double y : test) ss += (y - mu) * (y - mu);
    CHECK(rmse(std::vector<double>(test.size(), mu), test) == doctest::Approx(std::sqrt(ss / 4.0)));
    CHECK(rmse(test, test) == 0.0);
    (void)train;
}

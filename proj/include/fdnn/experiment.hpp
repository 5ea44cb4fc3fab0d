#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdnn/fdata.hpp"
#include "fdnn/transforms.hpp"

namespace fdnn {

enum class InputKind { Grid, BSpline, Fourier };
enum class Preproc { Raw, CenterReduce, Deriv1, Deriv2 };
enum class ImputeKind { None, Mean, Knn };
enum class PcaKind { None, Classical, Functional };
enum class ModelKind { Rbfn, Mlp };
enum class SplitMode { Fixed, Random };

/// One row of an experiment table: preprocessing chain, model family,
/// hyperparameter grids and seeds. Unset optionals mean "select by
/// cross-validation" (or by leave-one-out for the basis size).
struct ExperimentSpec {
    std::string name = "experiment";

    std::string data_path;
    DataFormat format = DataFormat::TecatorGrid;
    std::size_t test_size = 43;
    SplitMode split = SplitMode::Fixed;
    double drop_fraction = 0.0;
    std::uint64_t seed = 1;

    InputKind input = InputKind::Grid;
    int order = 4;
    std::optional<int> basis_size;
    Preproc preproc = Preproc::Raw;
    SemiMetricKind metric = SemiMetricKind::L2;

    ImputeKind impute = ImputeKind::None;
    std::optional<int> impute_k;
    std::vector<int> impute_k_grid{1, 2, 4, 8, 16};
    bool expert_scale = false;

    PcaKind pca = PcaKind::None;
    std::optional<int> pca_components;
    int pca_max_components = 18;
    bool pca_standardize = true;
    bool whiten = false;

    ModelKind model = ModelKind::Rbfn;
    int cv_folds = 4;
    int max_centers = 100;
    std::vector<double> width_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> ridge_grid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    std::vector<int> hidden_grid{1, 2, 3, 4, 5, 6};
    std::vector<double> decay_grid{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    int restarts = 60;
    int cv_restarts = 5;
    int max_iterations = 500;

    /// Preprocessing after folding the metric alias in (deriv metrics are
    /// realized as derivative preprocessing).
    Preproc effective_preproc() const;
    bool operator==(const ExperimentSpec&) const = default;
};

/// Throws ConfigError when the chain's stages are incompatible.
void validate(const ExperimentSpec& spec);

/// `key = value` lines; `#` starts a comment. Keys match the CLI flags.
ExperimentSpec parse_experiment_spec(std::istream& in, const std::string& source = "<config>");
ExperimentSpec load_experiment_spec(const std::string& path);
/// Applies one `key`, `value` setting (used by the parser and CLI flags).
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);
/// Every key in a fixed order; parse_experiment_spec reads it back unchanged.
std::string format_experiment_spec(const ExperimentSpec& spec);

struct RunOptions {
    unsigned threads = 1;
};

/// Held-out data that counts every access. The pipeline opens it exactly
/// once, after all model and preprocessing selection is finished.
class SealedTestSet {
public:
    explicit SealedTestSet(Dataset data) : data_(std::move(data)) {}
    std::size_t size() const noexcept { return data_.size(); }
    const Dataset& open() {
        ++accesses_;
        return data_;
    }
    std::size_t accesses() const noexcept { return accesses_; }

private:
    Dataset data_;
    std::size_t accesses_ = 0;
};

struct ExperimentReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> selected;  ///< in pipeline order
    double cv_score = 0.0;                                      ///< mean fold MSE of the winner
    double test_rmse = 0.0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::uint64_t seed = 0;
    std::string split;
    std::size_t test_accesses_before_final = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;

    std::string selected_string() const;
    std::string value(const std::string& key) const;
};

struct PreparedData {
    Dataset train;
    Dataset test;
};

/// Loads spec.data_path, removes drop_fraction of every function's points
/// (seeded from the master seed) and splits train/test.
PreparedData prepare_data(const ExperimentSpec& spec);
PreparedData prepare_data(const ExperimentSpec& spec, const Dataset& full);

/// Cross-validates every grid cell on `train` only, refits the winner on all
/// of `train`, then opens `test` once and reports the test RMSE.
ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& train, SealedTestSet& test,
                                const RunOptions& options = {});

/// Aligned text table: experiment, selected parameters, test RMSE.
void write_report_table(std::ostream& out, const std::vector<ExperimentReport>& reports);
/// Delimited file with columns experiment, selected_params, cv_mse, test_rmse.
void write_report_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);
/// experiment, wall_seconds (kept apart so reports stay byte-reproducible).
void write_timings_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);

/// Table identifiers understood by suite_specs.
std::vector<std::string> suite_names();

struct SuiteOptions {
    std::string data_path;
    std::uint64_t seed = 1;
    double drop_fraction = 0.1;  ///< used by the missing-data tables
};

/// The rows of one experiment table, in table order.
std::vector<ExperimentSpec> suite_specs(const std::string& table, const SuiteOptions& options);

std::string to_string(InputKind v);
std::string to_string(Preproc v);
std::string to_string(ImputeKind v);
std::string to_string(PcaKind v);
std::string to_string(ModelKind v);
std::string to_string(SplitMode v);

}  // namespace fdnn

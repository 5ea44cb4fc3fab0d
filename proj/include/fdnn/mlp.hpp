#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace fdnn {

/// One-hidden-layer perceptron out_bias + sum_h w_h tanh(b_h + v_h^T x).
///
/// Fed with scaled coordinates (or PCA scores of them), v_h^T x is the inner
/// product of the input function with the hidden unit's weight function.
///
/// Parameter layout: for each hidden unit h the block (v_h, b_h), then the
/// output weights w_1..w_H, then the output bias.
class MlpModel {
public:
    MlpModel(int inputs, int hidden);
    MlpModel(int inputs, int hidden, Eigen::VectorXd parameters);

    int inputs() const noexcept { return inputs_; }
    int hidden() const noexcept { return hidden_; }
    Eigen::Index parameter_count() const noexcept { return params_.size(); }
    const Eigen::VectorXd& parameters() const noexcept { return params_; }
    Eigen::VectorXd& parameters() noexcept { return params_; }

    Eigen::Index input_weight_index(int h, int j) const noexcept { return h * (inputs_ + 1) + j; }
    Eigen::Index hidden_bias_index(int h) const noexcept { return h * (inputs_ + 1) + inputs_; }
    Eigen::Index output_weight_index(int h) const noexcept { return hidden_ * (inputs_ + 1) + h; }
    Eigen::Index output_bias_index() const noexcept { return params_.size() - 1; }

    /// 1 for parameters subject to weight decay (every non-bias weight).
    Eigen::VectorXd decay_mask() const;

    double forward(const Eigen::VectorXd& x) const;
    Eigen::VectorXd forward(const Eigen::MatrixXd& rows) const;

private:
    int inputs_;
    int hidden_;
    Eigen::VectorXd params_;
};

/// SSE + decay * (sum of squared non-bias weights).
double regularized_loss(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double decay);

/// Analytic gradient of regularized_loss with respect to the parameters.
Eigen::VectorXd loss_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              double decay);

struct LmOptions {
    int max_iterations = 500;
    /// Stop when ||gradient|| < tolerance * (1 + loss).
    double gradient_tolerance = 1e-8;
};

struct LmResult {
    MlpModel model;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    std::vector<double> accepted_losses;  ///< loss after each accepted step, starting with the initial loss
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on the residual form
/// [f(x_i) - y_i ; sqrt(decay) * w]. Only loss-decreasing steps are accepted.
LmResult levenberg_marquardt(MlpModel start, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double decay,
                             const LmOptions& options = {});

struct MlpTrainOptions {
    int restarts = 60;
    std::uint64_t seed = 0;
    LmOptions lm;
};

struct MlpTrainResult {
    MlpModel model;
    double loss = 0.0;
    std::vector<double> restart_losses;  ///< NaN for diverged restarts
    int diverged = 0;
};

/// Random initial weights: uniform in [-0.7, 0.7] / sqrt(fan-in).
MlpModel random_mlp(int inputs, int hidden, std::uint64_t seed);

/// Trains from `restarts` random starts and keeps the one with the lowest
/// regularized training loss. Throws TrainingError when every start diverges.
MlpTrainResult train_mlp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int hidden, double decay,
                         const MlpTrainOptions& options = {});

}  // namespace fdnn

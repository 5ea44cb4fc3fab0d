#include "fdnn/mlp.hpp"

#include <cmath>
#include <limits>

#include "fdnn/errors.hpp"
#include "fdnn/random.hpp"

namespace fdnn {

MlpModel::MlpModel(int inputs, int hidden)
    : MlpModel(inputs, hidden, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden) * (inputs + 2) + 1)) {}

MlpModel::MlpModel(int inputs, int hidden, Eigen::VectorXd parameters)
    : inputs_(inputs), hidden_(hidden), params_(std::move(parameters)) {
    if (inputs_ < 1) throw ArgumentError("an MLP needs at least one input");
    if (hidden_ < 1) throw ArgumentError("an MLP needs at least one hidden unit");
    if (params_.size() != static_cast<Eigen::Index>(hidden_) * (inputs_ + 2) + 1)
        throw ContractError("parameter vector has the wrong length");
}

Eigen::VectorXd MlpModel::decay_mask() const {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(params_.size());
    for (int h = 0; h < hidden_; ++h) m[hidden_bias_index(h)] = 0.0;
    m[output_bias_index()] = 0.0;
    return m;
}

double MlpModel::forward(const Eigen::VectorXd& x) const {
    if (x.size() != inputs_) throw ContractError("input dimension mismatch");
    double out = params_[output_bias_index()];
    for (int h = 0; h < hidden_; ++h) {
        const double a = params_[hidden_bias_index(h)] + params_.segment(input_weight_index(h, 0), inputs_).dot(x);
        out += params_[output_weight_index(h)] * std::tanh(a);
    }
    return out;
}

namespace {

// Hidden-layer weights as an (inputs x hidden) matrix and biases.
struct Layer {
    Eigen::MatrixXd v;
    Eigen::VectorXd b;
    Eigen::VectorXd w;
    double out_bias;
};

Layer unpack(const MlpModel& m) {
    Layer l;
    const int d = m.inputs(), hdn = m.hidden();
    l.v.resize(d, hdn);
    l.b.resize(hdn);
    l.w.resize(hdn);
    const auto& p = m.parameters();
    for (int h = 0; h < hdn; ++h) {
        l.v.col(h) = p.segment(m.input_weight_index(h, 0), d);
        l.b[h] = p[m.hidden_bias_index(h)];
        l.w[h] = p[m.output_weight_index(h)];
    }
    l.out_bias = p[m.output_bias_index()];
    return l;
}

// tanh activations of every sample, (n x hidden).
Eigen::MatrixXd activations(const Layer& l, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd a = x * l.v;
    a.rowwise() += l.b.transpose();
    return a.array().tanh().matrix();
}

void check_data(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.cols() != m.inputs()) throw ContractError("input dimension mismatch");
    if (x.rows() != y.size()) throw ContractError("one target per input row is required");
}

// Jacobian of the outputs with respect to the parameters, (n x p).
Eigen::MatrixXd output_jacobian(const MlpModel& m, const Layer& l, const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& t) {
    const Eigen::Index n = x.rows();
    const int d = m.inputs(), hdn = m.hidden();
    Eigen::MatrixXd j(n, m.parameter_count());
    for (int h = 0; h < hdn; ++h) {
        const Eigen::VectorXd delta = l.w[h] * (1.0 - t.col(h).array().square()).matrix();
        j.middleCols(m.input_weight_index(h, 0), d) = x.array().colwise() * delta.array();
        j.col(m.hidden_bias_index(h)) = delta;
        j.col(m.output_weight_index(h)) = t.col(h);
    }
    j.col(m.output_bias_index()).setOnes();
    return j;
}

}  // namespace

Eigen::VectorXd MlpModel::forward(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != inputs_) throw ContractError("input dimension mismatch");
    const Layer l = unpack(*this);
    return (activations(l, rows) * l.w).array() + l.out_bias;
}

double regularized_loss(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double decay) {
    check_data(model, x, y);
    const double sse = (model.forward(x) - y).squaredNorm();
    const double penalty = model.parameters().cwiseProduct(model.decay_mask()).squaredNorm();
    return sse + decay * penalty;
}

Eigen::VectorXd loss_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              double decay) {
    check_data(model, x, y);
    const Layer l = unpack(model);
    const Eigen::MatrixXd t = activations(l, x);
    const Eigen::VectorXd r = ((t * l.w).array() + l.out_bias).matrix() - y;
    const Eigen::MatrixXd j = output_jacobian(model, l, x, t);
    return 2.0 * (j.transpose() * r) + 2.0 * decay * model.parameters().cwiseProduct(model.decay_mask());
}

LmResult levenberg_marquardt(MlpModel start, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double decay,
                             const LmOptions& options) {
    check_data(start, x, y);
    if (!(decay >= 0.0)) throw ArgumentError("weight decay must be non-negative");
    const Eigen::VectorXd mask = start.decay_mask();
    const Eigen::Index p = start.parameter_count();

    LmResult res{std::move(start), 0.0, 0, false, false, {}};
    MlpModel& model = res.model;
    auto evaluate = [&](const MlpModel& m, Eigen::MatrixXd* jac, Eigen::VectorXd* resid) {
        const Layer l = unpack(m);
        const Eigen::MatrixXd t = activations(l, x);
        Eigen::VectorXd r = ((t * l.w).array() + l.out_bias).matrix() - y;
        const double loss = r.squaredNorm() + decay * m.parameters().cwiseProduct(mask).squaredNorm();
        if (jac) *jac = output_jacobian(m, l, x, t);
        if (resid) *resid = std::move(r);
        return loss;
    };

    Eigen::MatrixXd jac;
    Eigen::VectorXd r;
    double loss = evaluate(model, &jac, &r);
    if (!std::isfinite(loss)) {
        res.diverged = true;
        res.loss = loss;
        return res;
    }
    res.accepted_losses.push_back(loss);
    double mu = -1.0;
    double nu = 2.0;
    int stagnant = 0;

    for (int it = 0; it < options.max_iterations; ++it) {
        res.iterations = it + 1;
        // Half-loss normal equations: (J^T J + decay M + mu I) step = -(J^T r + decay M theta).
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
        h.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
        h.diagonal() += decay * mask;
        const Eigen::VectorXd g = jac.transpose() * r + decay * model.parameters().cwiseProduct(mask);
        if (2.0 * g.norm() < options.gradient_tolerance * (1.0 + loss)) {
            res.converged = true;
            break;
        }
        if (mu < 0.0) mu = 1e-3 * std::max(h.diagonal().maxCoeff(), 1e-12);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = h;
            damped.diagonal().array() += mu;
            const Eigen::VectorXd step = -damped.selfadjointView<Eigen::Lower>().ldlt().solve(g);
            MlpModel trial(model.inputs(), model.hidden(), model.parameters() + step);
            Eigen::MatrixXd tjac;
            Eigen::VectorXd tr;
            const double tloss = evaluate(trial, &tjac, &tr);
            // Predicted decrease of the quadratic model of the half loss.
            const double predicted = 0.5 * step.dot(mu * step - g);
            if (std::isfinite(tloss) && tloss < loss) {
                const double rho = predicted > 0.0 ? 0.5 * (loss - tloss) / predicted : 1.0;
                mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
                stagnant = (loss - tloss) < 1e-12 * loss ? stagnant + 1 : 0;
                model = std::move(trial);
                jac = std::move(tjac);
                r = std::move(tr);
                loss = tloss;
                res.accepted_losses.push_back(loss);
                accepted = true;
            } else {
                mu *= nu;
                nu *= 2.0;
                if (mu > 1e20 || !std::isfinite(mu)) break;
            }
        }
        if (!accepted || stagnant >= 5) {
            // No decrease is possible at machine precision: a stationary point.
            res.converged = true;
            break;
        }
    }
    res.loss = loss;
    return res;
}

MlpModel random_mlp(int inputs, int hidden, std::uint64_t seed) {
    MlpModel m(inputs, hidden);
    Rng rng(seed);
    auto draw = [&](double scale) { return (2.0 * uniform01(rng) - 1.0) * 0.7 * scale; };
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(inputs));
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto& p = m.parameters();
    for (int h = 0; h < hidden; ++h) {
        for (int j = 0; j < inputs; ++j) p[m.input_weight_index(h, j)] = draw(in_scale);
        p[m.hidden_bias_index(h)] = draw(in_scale);
        p[m.output_weight_index(h)] = draw(out_scale);
    }
    p[m.output_bias_index()] = draw(out_scale);
    return m;
}

MlpTrainResult train_mlp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int hidden, double decay,
                         const MlpTrainOptions& options) {
    if (options.restarts < 1) throw ArgumentError("at least one restart is required");
    MlpTrainResult out{MlpModel(static_cast<int>(x.cols()), hidden), 0.0, {}, 0};
    out.loss = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int r = 0; r < options.restarts; ++r) {
        MlpModel start = random_mlp(static_cast<int>(x.cols()), hidden, derive_seed(options.seed, "mlp-restart", r));
        LmResult res = levenberg_marquardt(std::move(start), x, y, decay, options.lm);
        if (res.diverged || !std::isfinite(res.loss)) {
            out.restart_losses.push_back(std::numeric_limits<double>::quiet_NaN());
            ++out.diverged;
            continue;
        }
        out.restart_losses.push_back(res.loss);
        if (!any || res.loss < out.loss) {
            out.loss = res.loss;
            out.model = std::move(res.model);
            any = true;
        }
    }
    if (!any) throw TrainingError("every MLP restart diverged");
    return out;
}

}  // namespace fdnn

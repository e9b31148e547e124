#include "ulight/solver.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ulight/errors.hpp"

namespace ulight {

namespace {

void check_batches(const PlanModel& plan, const Eigen::MatrixXd& batch_x,
                   const Eigen::MatrixXd& batch_y) {
    if (batch_x.rows() < 1 || batch_y.rows() < 1) {
        throw DimensionError("objective: batches must be non-empty");
    }
    if (batch_x.cols() != plan.u.dim || batch_y.cols() != plan.v.dim) {
        throw DimensionError("objective: sample dimension does not match the model");
    }
}

} // namespace

Eigen::VectorXd pack_plan(const PlanModel& plan) {
    const Eigen::VectorXd pv = pack_params(plan.v);
    const Eigen::VectorXd pu = pack_params(plan.u);
    Eigen::VectorXd out(pv.size() + pu.size());
    out << pv, pu;
    return out;
}

PlanModel unpack_plan(const Eigen::VectorXd& params, const PlanModel& like) {
    const int d = like.v.dim;
    const Eigen::Index nv = like.v.components() * (2 * d + 1);
    const Eigen::Index nu = like.u.components() * (2 * d + 1);
    if (params.size() != nv + nu) {
        throw DimensionError("unpack_plan: expected length " + std::to_string(nv + nu) +
                             ", got " + std::to_string(params.size()));
    }
    PlanModel out = like;
    out.v = unpack_params(params.head(nv), d, static_cast<int>(like.v.components()));
    out.u = unpack_params(params.tail(nu), d, static_cast<int>(like.u.components()));
    return out;
}

double objective(const PlanModel& plan, const Eigen::MatrixXd& batch_x,
                 const Eigen::MatrixXd& batch_y) {
    check_batches(plan, batch_x, batch_y);
    const double eps = plan.epsilon;
    const double n = static_cast<double>(batch_x.rows());
    const double m = static_cast<double>(batch_y.rows());

    double term_x = 0.0;
    for (Eigen::Index i = 0; i < batch_x.rows(); ++i) {
        const Eigen::VectorXd x = batch_x.row(i);
        const double arg = -eps * (log_density(plan.u, eps, x) - log_c_theta(plan, x)) -
                           0.5 * x.squaredNorm();
        const double val = conjugate(plan.div1, arg);
        if (!std::isfinite(val)) {
            throw NumericError("objective: non-finite source-side conjugate at sample " +
                                   std::to_string(i),
                               i);
        }
        term_x += val;
    }

    double term_y = 0.0;
    for (Eigen::Index j = 0; j < batch_y.rows(); ++j) {
        const Eigen::VectorXd y = batch_y.row(j);
        const double arg = -eps * log_density(plan.v, eps, y) - 0.5 * y.squaredNorm();
        const double val = conjugate(plan.div2, arg);
        if (!std::isfinite(val)) {
            throw NumericError("objective: non-finite target-side conjugate at sample " +
                                   std::to_string(j),
                               j);
        }
        term_y += val;
    }

    return term_x / n + term_y / m + eps * total_mass(plan.u);
}

ObjectiveGrad objective_and_grad(const PlanModel& plan, const Eigen::MatrixXd& batch_x,
                                 const Eigen::MatrixXd& batch_y) {
    check_batches(plan, batch_x, batch_y);
    const double eps = plan.epsilon;
    const int d = plan.v.dim;
    const Eigen::Index nv = plan.v.components() * (2 * d + 1);
    const Eigen::Index nu = plan.u.components() * (2 * d + 1);
    const double n = static_cast<double>(batch_x.rows());
    const double m = static_cast<double>(batch_y.rows());

    ObjectiveGrad out;
    out.grad = Eigen::VectorXd::Zero(nv + nu);
    auto grad_v = out.grad.head(nv);
    auto grad_u = out.grad.tail(nu);

    double total = 0.0;
    for (Eigen::Index i = 0; i < batch_x.rows(); ++i) {
        const Eigen::VectorXd x = batch_x.row(i);
        const ValueAndGrad log_u = log_density_with_grad(plan.u, eps, x);
        const ValueAndGrad log_c = log_c_theta_with_grad(plan, x);
        const double arg = -eps * (log_u.value - log_c.value) - 0.5 * x.squaredNorm();
        const double val = conjugate(plan.div1, arg);
        if (!std::isfinite(val)) {
            throw NumericError("objective: non-finite source-side conjugate at sample " +
                                   std::to_string(i),
                               i);
        }
        const double slope = conjugate_deriv(plan.div1, arg) / n;
        total += val;
        grad_u -= (slope * eps) * log_u.grad;
        grad_v += (slope * eps) * log_c.grad;
    }
    total /= n;

    double term_y = 0.0;
    for (Eigen::Index j = 0; j < batch_y.rows(); ++j) {
        const Eigen::VectorXd y = batch_y.row(j);
        const ValueAndGrad log_v = log_density_with_grad(plan.v, eps, y);
        const double arg = -eps * log_v.value - 0.5 * y.squaredNorm();
        const double val = conjugate(plan.div2, arg);
        if (!std::isfinite(val)) {
            throw NumericError("objective: non-finite target-side conjugate at sample " +
                                   std::to_string(j),
                               j);
        }
        term_y += val;
        grad_v -= (conjugate_deriv(plan.div2, arg) * eps / m) * log_v.grad;
    }
    total += term_y / m;

    // mass term: d/d log beta_l of eps * sum_l exp(log beta_l)
    total += eps * total_mass(plan.u);
    grad_u.head(plan.u.components()) += eps * plan.u.log_weights.array().exp().matrix();

    out.value = total;
    return out;
}

TrainState adam_step(const TrainState& state, const Eigen::VectorXd& grad, double lr,
                     double beta1, double beta2, double eps) {
    if (!grad.allFinite()) {
        throw NumericError("adam_step: non-finite gradient", -1, state.step);
    }
    Eigen::VectorXd params = pack_plan(state.plan);
    if (grad.size() != params.size()) {
        throw DimensionError("adam_step: gradient length does not match parameter count");
    }

    TrainState next = state;
    next.step = state.step + 1;
    next.adam_m = beta1 * state.adam_m + (1.0 - beta1) * grad;
    next.adam_v = beta2 * state.adam_v.array() + (1.0 - beta2) * grad.array().square();

    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(next.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(next.step));
    const Eigen::ArrayXd m_hat = next.adam_m.array() / bc1;
    const Eigen::ArrayXd v_hat = next.adam_v.array() / bc2;
    params.array() -= lr * m_hat / (v_hat.sqrt() + eps);

    next.plan = unpack_plan(params, state.plan);
    return next;
}

PlanModel initialize_plan(const SolverConfig& config, const Eigen::MatrixXd& samples_x,
                          const Eigen::MatrixXd& samples_y, Rng& rng) {
    const int d = static_cast<int>(samples_x.cols());

    auto anchored = [&](const Eigen::MatrixXd& data, int c) {
        GaussianMixture m;
        m.dim = d;
        m.log_weights = Eigen::VectorXd::Constant(c, -std::log(static_cast<double>(c)));
        m.log_diag_covs = Eigen::MatrixXd::Zero(c, d);
        m.means.resize(c, d);
        // distinct rows while possible, wrapping when c exceeds the dataset
        const Eigen::Index count = data.rows();
        std::vector<Eigen::Index> order(count);
        for (Eigen::Index i = 0; i < count; ++i) order[i] = i;
        for (Eigen::Index i = count - 1; i > 0; --i) {
            std::swap(order[i], order[rng.integer(static_cast<std::uint64_t>(i) + 1)]);
        }
        for (int k = 0; k < c; ++k) {
            m.means.row(k) = data.row(order[k % count]);
        }
        return m;
    };

    PlanModel plan;
    plan.epsilon = config.epsilon;
    plan.div1 = config.div1;
    plan.div2 = config.div2;
    plan.v = anchored(samples_y, config.components_k);
    plan.u = anchored(samples_x, config.components_l);
    return plan;
}

PlanModel train(const SolverConfig& config, const Eigen::MatrixXd& samples_x,
                const Eigen::MatrixXd& samples_y, const std::optional<PlanModel>& init,
                const ProgressSink& progress) {
    if (samples_x.rows() == 0 || samples_y.rows() == 0) {
        throw DimensionError("train: datasets must be non-empty");
    }
    if (samples_x.cols() != samples_y.cols()) {
        throw DimensionError("train: source and target dimensions differ");
    }
    if (config.epsilon <= 0.0 || config.learning_rate <= 0.0 || config.batch_size < 1 ||
        config.steps < 0) {
        throw Error("train: invalid configuration");
    }

    Rng rng(config.seed);
    TrainState state;
    state.plan = init ? *init : initialize_plan(config, samples_x, samples_y, rng);
    if (state.plan.v.dim != samples_x.cols()) {
        throw DimensionError("train: initial model dimension does not match the data");
    }
    const Eigen::Index n_params = pack_plan(state.plan).size();
    state.adam_m = Eigen::VectorXd::Zero(n_params);
    state.adam_v = Eigen::VectorXd::Zero(n_params);

    Eigen::MatrixXd batch_x(config.batch_size, samples_x.cols());
    Eigen::MatrixXd batch_y(config.batch_size, samples_y.cols());
    for (long step = 1; step <= config.steps; ++step) {
        for (int b = 0; b < config.batch_size; ++b) {
            batch_x.row(b) = samples_x.row(rng.integer(samples_x.rows()));
            batch_y.row(b) = samples_y.row(rng.integer(samples_y.rows()));
        }
        try {
            const ObjectiveGrad og = objective_and_grad(state.plan, batch_x, batch_y);
            state = adam_step(state, og.grad, config.learning_rate, config.adam_beta1,
                              config.adam_beta2, config.adam_eps);
            if (progress) progress(step, og.value);
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (training step " +
                                   std::to_string(step) + ")",
                               e.sample_index, step);
        }
    }
    return state.plan;
}

BalancedDecomposition balanced_decomposition(const PlanModel& plan,
                                             const Eigen::MatrixXd& batch_x,
                                             const Eigen::MatrixXd& batch_y) {
    check_batches(plan, batch_x, batch_y);
    const double eps = plan.epsilon;
    const double n = static_cast<double>(batch_x.rows());
    const double m = static_cast<double>(batch_y.rows());

    BalancedDecomposition out;
    for (Eigen::Index i = 0; i < batch_x.rows(); ++i) {
        const Eigen::VectorXd x = batch_x.row(i);
        out.theta_term += log_c_theta(plan, x) / n;
        out.omega_term -= log_density(plan.u, eps, x) / n;
        out.constant += 0.5 * x.squaredNorm() / n;
    }
    for (Eigen::Index j = 0; j < batch_y.rows(); ++j) {
        const Eigen::VectorXd y = batch_y.row(j);
        out.theta_term -= log_density(plan.v, eps, y) / m;
        out.constant += 0.5 * y.squaredNorm() / m;
    }
    out.omega_term += total_mass(plan.u);
    return out;
}

} // namespace ulight

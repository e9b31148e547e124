#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "ulight/plan.hpp"

namespace ulight {

struct SolverConfig {
    double epsilon = 0.05;
    DivergenceSpec div1;
    DivergenceSpec div2;
    int components_k = 5; // conditional-side mixture size
    int components_l = 5; // marginal-side mixture size
    double learning_rate = 3e-4;
    long steps = 20000;
    int batch_size = 128;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

/// Optimizer state. Moment vectors follow the packed layout
/// [pack(v); pack(u)] of plan parameters.
struct TrainState {
    PlanModel plan;
    Eigen::VectorXd adam_m;
    Eigen::VectorXd adam_v;
    long step = 0;
};

/// Packed parameter vector [pack(plan.v); pack(plan.u)] and its inverse.
Eigen::VectorXd pack_plan(const PlanModel& plan);
PlanModel unpack_plan(const Eigen::VectorXd& params, const PlanModel& like);

/// Empirical objective on minibatches (rows are samples):
///   mean_i conj1(-eps log(u(x_i)/c(x_i)) - |x_i|^2/2)
/// + mean_j conj2(-eps log v(y_j) - |y_j|^2/2)
/// + eps * total_mass(u).
/// Throws NumericError naming the offending sample when a conjugate value
/// is non-finite (overflow is an error, never clamped).
double objective(const PlanModel& plan, const Eigen::MatrixXd& batch_x,
                 const Eigen::MatrixXd& batch_y);

struct ObjectiveGrad {
    double value = 0.0;
    Eigen::VectorXd grad; // w.r.t. [pack(v); pack(u)]
};
ObjectiveGrad objective_and_grad(const PlanModel& plan, const Eigen::MatrixXd& batch_x,
                                 const Eigen::MatrixXd& batch_y);

/// One Adam update with bias correction; pure (returns the new state).
TrainState adam_step(const TrainState& state, const Eigen::VectorXd& grad, double lr,
                     double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Data-anchored initialization: uniform log-weights, means drawn from the
/// matching dataset (v from target samples, u from source samples), unit
/// pre-epsilon covariances.
PlanModel initialize_plan(const SolverConfig& config, const Eigen::MatrixXd& samples_x,
                          const Eigen::MatrixXd& samples_y, Rng& rng);

/// Per-step progress sink; receives (step, minibatch objective).
using ProgressSink = std::function<void(long, double)>;

/// Minibatch Adam loop: config.steps iterations, batches drawn with
/// replacement from a PRNG seeded by config.seed. Deterministic given
/// (seed, datasets). Objective errors are rethrown with the step attached.
PlanModel train(const SolverConfig& config, const Eigen::MatrixXd& samples_x,
                const Eigen::MatrixXd& samples_y,
                const std::optional<PlanModel>& init = std::nullopt,
                const ProgressSink& progress = nullptr);

/// Terms of the balanced-case split of the objective,
///   objective = eps * (theta_term) + eps * (omega_term) - constant,
/// with theta_term = mean log c(x) - mean log v(y) depending only on v's
/// parameters, omega_term = -mean log u(x) + total_mass(u) only on u's, and
/// constant = mean |x|^2/2 + mean |y|^2/2. Holds when both penalties are
/// balanced.
struct BalancedDecomposition {
    double theta_term = 0.0;
    double omega_term = 0.0;
    double constant = 0.0;

    [[nodiscard]] double total(double epsilon) const {
        return epsilon * (theta_term + omega_term) - constant;
    }
};
BalancedDecomposition balanced_decomposition(const PlanModel& plan,
                                             const Eigen::MatrixXd& batch_x,
                                             const Eigen::MatrixXd& batch_y);

} // namespace ulight

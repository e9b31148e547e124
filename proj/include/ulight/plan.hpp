#pragma once

#include <Eigen/Dense>

#include "ulight/divergence.hpp"
#include "ulight/gmm.hpp"
#include "ulight/rng.hpp"

namespace ulight {

/// Learned transport plan gamma(x, y) = u(x) * gamma(y | x), where u and v
/// are unnormalized Gaussian mixtures: u parametrizes the left marginal and
/// v the conditionals through the normalization c(x).
struct PlanModel {
    double epsilon = 0.05;
    GaussianMixture v; // K components, conditional side
    GaussianMixture u; // L components, marginal side
    DivergenceSpec div1; // source-side penalty
    DivergenceSpec div2; // target-side penalty
};

/// Normalized conditional gamma(. | x): a probability mixture with
/// component means r_k + S_k x and covariances epsilon * S_k (stored
/// already scaled, so densities and draws use them as-is).
struct ConditionalMixture {
    Eigen::VectorXd log_weights; // normalized: exp() sums to 1
    Eigen::MatrixXd means;       // K x d
    Eigen::MatrixXd diag_covs;   // K x d, epsilon * S_k

    [[nodiscard]] double log_density(const Eigen::VectorXd& y) const;
    [[nodiscard]] Eigen::MatrixXd sample(Rng& rng, int n) const;
    [[nodiscard]] Eigen::VectorXd mean() const;
};

/// log c(x) = log sum_k alpha_k exp{(x'S_k x + 2 r_k'x) / (2 epsilon)},
/// the closed-form conditional normalizer, via log-sum-exp.
double log_c_theta(const PlanModel& p, const Eigen::VectorXd& x);

/// log c(x) and its gradient w.r.t. the packed parameters of p.v.
ValueAndGrad log_c_theta_with_grad(const PlanModel& p, const Eigen::VectorXd& x);

ConditionalMixture conditional(const PlanModel& p, const Eigen::VectorXd& x);

/// log gamma(x, y) = log u(x) + <x,y>/epsilon + log v(y) - log c(x).
double log_joint(const PlanModel& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Dual potentials phi(x) = epsilon log(u(x)/c(x)) + |x|^2/2 and
/// psi(y) = epsilon log v(y) + |y|^2/2; they reconstruct the plan as
/// gamma(x,y) = exp{(phi(x) + psi(y) - |x-y|^2/2)/epsilon}.
struct Potentials {
    double phi = 0.0;
    double psi = 0.0;
};
Potentials potentials(const PlanModel& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

} // namespace ulight

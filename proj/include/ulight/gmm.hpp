#pragma once

#include <Eigen/Dense>

#include "ulight/rng.hpp"

namespace ulight {

/// Unnormalized Gaussian mixture with diagonal covariances.
///
/// Component k has weight exp(log_weights[k]), mean means.row(k) and
/// covariance epsilon * diag(exp(log_diag_covs.row(k))), where epsilon is
/// supplied at evaluation time. Weights and covariance diagonals are stored
/// in log-domain, so positivity holds by construction and the parameters
/// form an unconstrained optimization variable.
struct GaussianMixture {
    int dim = 0;
    Eigen::VectorXd log_weights;   // C
    Eigen::MatrixXd means;         // C x dim
    Eigen::MatrixXd log_diag_covs; // C x dim

    [[nodiscard]] Eigen::Index components() const { return log_weights.size(); }
};

/// Mixture with validated shapes; throws DimensionError on inconsistency.
GaussianMixture make_mixture(int dim, Eigen::VectorXd log_weights, Eigen::MatrixXd means,
                             Eigen::MatrixXd log_diag_covs);

/// log sum_k w_k N(x | mean_k, epsilon * diag_cov_k), evaluated with
/// log-sum-exp so exponents up to +-1e4 neither overflow nor underflow.
double log_density(const GaussianMixture& m, double epsilon, const Eigen::VectorXd& x);

/// Value of log_density together with its gradient w.r.t. the packed
/// parameters of m (see pack_params for the layout).
struct ValueAndGrad {
    double value = 0.0;
    Eigen::VectorXd grad;
};
ValueAndGrad log_density_with_grad(const GaussianMixture& m, double epsilon,
                                   const Eigen::VectorXd& x);

/// Total mass sum_k exp(log_weights[k]).
double total_mass(const GaussianMixture& m);

/// n independent draws (rows): component index proportional to weights,
/// then a Gaussian draw with that component's mean and covariance.
Eigen::MatrixXd sample(const GaussianMixture& m, double epsilon, Rng& rng, int n);

/// Flat parameter vector [log_weights; means row-major; log_diag_covs
/// row-major], length C*(2*dim+1).
Eigen::VectorXd pack_params(const GaussianMixture& m);

/// Inverse of pack_params; throws DimensionError on wrong length.
GaussianMixture unpack_params(const Eigen::VectorXd& v, int dim, int components);

} // namespace ulight

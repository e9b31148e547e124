#include "ulight/gmm.hpp"

#include <cmath>
#include <string>

#include "ulight/errors.hpp"

namespace ulight {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // log(2*pi)

void check_point(const GaussianMixture& m, const Eigen::VectorXd& x, const char* op) {
    if (x.size() != m.dim) {
        throw DimensionError(std::string(op) + ": point has length " + std::to_string(x.size()) +
                             ", mixture dimension is " + std::to_string(m.dim));
    }
    if (!x.allFinite()) {
        throw NumericError(std::string(op) + ": non-finite input coordinate");
    }
}

// Per-component log of w_k * N(x | mean_k, epsilon * diag_cov_k).
Eigen::VectorXd component_log_terms(const GaussianMixture& m, double epsilon,
                                    const Eigen::VectorXd& x) {
    const Eigen::Index c = m.components();
    Eigen::VectorXd terms(c);
    const double log_eps = std::log(epsilon);
    for (Eigen::Index k = 0; k < c; ++k) {
        double quad = 0.0;
        double log_det = 0.0;
        for (int i = 0; i < m.dim; ++i) {
            const double s = m.log_diag_covs(k, i);
            const double d = x[i] - m.means(k, i);
            quad += d * d * std::exp(-s);
            log_det += s + log_eps;
        }
        terms[k] = m.log_weights[k] - 0.5 * (m.dim * kLog2Pi + log_det + quad / epsilon);
    }
    return terms;
}

double log_sum_exp(const Eigen::VectorXd& v) {
    const double hi = v.maxCoeff();
    if (!std::isfinite(hi)) return hi; // all -inf (or a NaN/inf poisoning the max)
    return hi + std::log((v.array() - hi).exp().sum());
}

} // namespace

GaussianMixture make_mixture(int dim, Eigen::VectorXd log_weights, Eigen::MatrixXd means,
                             Eigen::MatrixXd log_diag_covs) {
    if (dim <= 0) throw DimensionError("make_mixture: dim must be positive");
    const Eigen::Index c = log_weights.size();
    if (c == 0) throw DimensionError("make_mixture: at least one component required");
    if (means.rows() != c || means.cols() != dim || log_diag_covs.rows() != c ||
        log_diag_covs.cols() != dim) {
        throw DimensionError("make_mixture: inconsistent parameter shapes");
    }
    GaussianMixture m;
    m.dim = dim;
    m.log_weights = std::move(log_weights);
    m.means = std::move(means);
    m.log_diag_covs = std::move(log_diag_covs);
    return m;
}

double log_density(const GaussianMixture& m, double epsilon, const Eigen::VectorXd& x) {
    if (epsilon <= 0.0) throw NumericError("log_density: epsilon must be positive");
    check_point(m, x, "log_density");
    return log_sum_exp(component_log_terms(m, epsilon, x));
}

ValueAndGrad log_density_with_grad(const GaussianMixture& m, double epsilon,
                                   const Eigen::VectorXd& x) {
    if (epsilon <= 0.0) throw NumericError("log_density_with_grad: epsilon must be positive");
    check_point(m, x, "log_density_with_grad");

    const Eigen::Index c = m.components();
    const int d = m.dim;
    const Eigen::VectorXd terms = component_log_terms(m, epsilon, x);
    const double value = log_sum_exp(terms);

    ValueAndGrad out;
    out.value = value;
    out.grad = Eigen::VectorXd::Zero(c * (2 * d + 1));
    for (Eigen::Index k = 0; k < c; ++k) {
        const double resp = std::exp(terms[k] - value); // component responsibility
        out.grad[k] = resp;
        for (int i = 0; i < d; ++i) {
            const double inv_cov = std::exp(-m.log_diag_covs(k, i)) / epsilon;
            const double diff = x[i] - m.means(k, i);
            out.grad[c + k * d + i] = resp * diff * inv_cov;
            out.grad[c + c * d + k * d + i] = resp * 0.5 * (diff * diff * inv_cov - 1.0);
        }
    }
    return out;
}

double total_mass(const GaussianMixture& m) {
    return m.log_weights.array().exp().sum();
}

Eigen::MatrixXd sample(const GaussianMixture& m, double epsilon, Rng& rng, int n) {
    const Eigen::VectorXd weights = m.log_weights.array().exp();
    Eigen::MatrixXd out(n, m.dim);
    for (int s = 0; s < n; ++s) {
        const Eigen::Index k = rng.categorical(weights);
        for (int i = 0; i < m.dim; ++i) {
            const double sd = std::sqrt(epsilon * std::exp(m.log_diag_covs(k, i)));
            out(s, i) = m.means(k, i) + sd * rng.normal();
        }
    }
    return out;
}

Eigen::VectorXd pack_params(const GaussianMixture& m) {
    const Eigen::Index c = m.components();
    const int d = m.dim;
    Eigen::VectorXd v(c * (2 * d + 1));
    v.head(c) = m.log_weights;
    for (Eigen::Index k = 0; k < c; ++k) {
        v.segment(c + k * d, d) = m.means.row(k);
        v.segment(c + c * d + k * d, d) = m.log_diag_covs.row(k);
    }
    return v;
}

GaussianMixture unpack_params(const Eigen::VectorXd& v, int dim, int components) {
    const Eigen::Index expected = static_cast<Eigen::Index>(components) * (2 * dim + 1);
    if (v.size() != expected) {
        throw DimensionError("unpack_params: expected length " + std::to_string(expected) +
                             ", got " + std::to_string(v.size()));
    }
    GaussianMixture m;
    m.dim = dim;
    m.log_weights = v.head(components);
    m.means.resize(components, dim);
    m.log_diag_covs.resize(components, dim);
    for (int k = 0; k < components; ++k) {
        m.means.row(k) = v.segment(components + k * dim, dim);
        m.log_diag_covs.row(k) = v.segment(components + components * dim + k * dim, dim);
    }
    return m;
}

} // namespace ulight

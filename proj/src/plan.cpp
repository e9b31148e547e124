#include "ulight/plan.hpp"

#include <cmath>
#include <string>

#include "ulight/errors.hpp"

namespace ulight {

namespace {

void check_point(const GaussianMixture& m, const Eigen::VectorXd& x, const char* op) {
    if (x.size() != m.dim) {
        throw DimensionError(std::string(op) + ": point has length " + std::to_string(x.size()) +
                             ", model dimension is " + std::to_string(m.dim));
    }
    if (!x.allFinite()) {
        throw NumericError(std::string(op) + ": non-finite input coordinate");
    }
}

// log alpha_k + (x'S_k x + 2 r_k'x) / (2 epsilon) for every component of v.
Eigen::VectorXd adjusted_log_weights(const PlanModel& p, const Eigen::VectorXd& x) {
    const GaussianMixture& v = p.v;
    const Eigen::Index c = v.components();
    Eigen::VectorXd terms(c);
    for (Eigen::Index k = 0; k < c; ++k) {
        double quad = 0.0;
        for (int i = 0; i < v.dim; ++i) {
            quad += std::exp(v.log_diag_covs(k, i)) * x[i] * x[i] + 2.0 * v.means(k, i) * x[i];
        }
        terms[k] = v.log_weights[k] + quad / (2.0 * p.epsilon);
    }
    return terms;
}

double log_sum_exp(const Eigen::VectorXd& v) {
    const double hi = v.maxCoeff();
    if (!std::isfinite(hi)) return hi;
    return hi + std::log((v.array() - hi).exp().sum());
}

} // namespace

double ConditionalMixture::log_density(const Eigen::VectorXd& y) const {
    GaussianMixture m;
    m.dim = static_cast<int>(means.cols());
    m.log_weights = log_weights;
    m.means = means;
    m.log_diag_covs = diag_covs.array().log();
    return ulight::log_density(m, 1.0, y);
}

Eigen::MatrixXd ConditionalMixture::sample(Rng& rng, int n) const {
    GaussianMixture m;
    m.dim = static_cast<int>(means.cols());
    m.log_weights = log_weights;
    m.means = means;
    m.log_diag_covs = diag_covs.array().log();
    return ulight::sample(m, 1.0, rng, n);
}

Eigen::VectorXd ConditionalMixture::mean() const {
    const Eigen::VectorXd w = log_weights.array().exp();
    return means.transpose() * w;
}

double log_c_theta(const PlanModel& p, const Eigen::VectorXd& x) {
    check_point(p.v, x, "log_c_theta");
    return log_sum_exp(adjusted_log_weights(p, x));
}

ValueAndGrad log_c_theta_with_grad(const PlanModel& p, const Eigen::VectorXd& x) {
    check_point(p.v, x, "log_c_theta_with_grad");
    const GaussianMixture& v = p.v;
    const Eigen::Index c = v.components();
    const int d = v.dim;

    const Eigen::VectorXd terms = adjusted_log_weights(p, x);
    const double value = log_sum_exp(terms);

    ValueAndGrad out;
    out.value = value;
    out.grad = Eigen::VectorXd::Zero(c * (2 * d + 1));
    for (Eigen::Index k = 0; k < c; ++k) {
        const double resp = std::exp(terms[k] - value);
        out.grad[k] = resp;
        for (int i = 0; i < d; ++i) {
            out.grad[c + k * d + i] = resp * x[i] / p.epsilon;
            out.grad[c + c * d + k * d + i] =
                resp * std::exp(v.log_diag_covs(k, i)) * x[i] * x[i] / (2.0 * p.epsilon);
        }
    }
    return out;
}

ConditionalMixture conditional(const PlanModel& p, const Eigen::VectorXd& x) {
    check_point(p.v, x, "conditional");
    const GaussianMixture& v = p.v;
    const Eigen::Index c = v.components();
    const int d = v.dim;

    const Eigen::VectorXd terms = adjusted_log_weights(p, x);
    const double log_c = log_sum_exp(terms);

    ConditionalMixture cond;
    cond.log_weights = terms.array() - log_c;
    cond.means.resize(c, d);
    cond.diag_covs.resize(c, d);
    for (Eigen::Index k = 0; k < c; ++k) {
        for (int i = 0; i < d; ++i) {
            const double s = std::exp(v.log_diag_covs(k, i));
            cond.means(k, i) = v.means(k, i) + s * x[i];
            cond.diag_covs(k, i) = p.epsilon * s;
        }
    }
    return cond;
}

double log_joint(const PlanModel& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_point(p.u, x, "log_joint");
    check_point(p.v, y, "log_joint");
    return log_density(p.u, p.epsilon, x) + x.dot(y) / p.epsilon +
           log_density(p.v, p.epsilon, y) - log_c_theta(p, x);
}

Potentials potentials(const PlanModel& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_point(p.u, x, "potentials");
    check_point(p.v, y, "potentials");
    Potentials out;
    out.phi = p.epsilon * (log_density(p.u, p.epsilon, x) - log_c_theta(p, x)) +
              0.5 * x.squaredNorm();
    out.psi = p.epsilon * log_density(p.v, p.epsilon, y) + 0.5 * y.squaredNorm();
    return out;
}

} // namespace ulight

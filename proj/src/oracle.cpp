#include "ulight/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ulight/errors.hpp"

namespace ulight::oracle {

namespace {

// Generator f of the marginal penalty, needed only for primal values.
// Balanced is the indicator of a matched marginal: 0 on feasible plans.
double primal_generator(const DivergenceSpec& d, double t) {
    switch (d.kind) {
    case DivergenceKind::scaled_kl:
        if (t < 0.0) return std::numeric_limits<double>::infinity();
        if (t == 0.0) return d.tau;
        return d.tau * (t * std::log(t) - t + 1.0);
    case DivergenceKind::scaled_chi2:
        if (t < 0.0) return std::numeric_limits<double>::infinity();
        return d.tau * (t - 1.0) * (t - 1.0);
    case DivergenceKind::balanced:
        return 0.0;
    }
    throw Error("primal_generator: unknown divergence kind");
}

double log_sum_exp(const Eigen::VectorXd& v) {
    const double hi = v.maxCoeff();
    if (!std::isfinite(hi)) return hi;
    return hi + std::log((v.array() - hi).exp().sum());
}

// Half squared distance matrix between the grids' nodes.
Eigen::MatrixXd half_sq_cost(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
    Eigen::MatrixXd c(xs.size(), ys.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        for (Eigen::Index j = 0; j < ys.size(); ++j) {
            const double d = xs[i] - ys[j];
            c(i, j) = 0.5 * d * d;
        }
    }
    return c;
}

} // namespace

Grid1D::Grid1D(double lo, double hi, int n) : lo(lo), hi(hi), n(n) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo >= hi) {
        throw DimensionError("Grid1D: bounds must be finite with lo < hi");
    }
    if (n < 16) throw DimensionError("Grid1D: at least 16 points per axis");
}

Eigen::VectorXd Grid1D::nodes() const {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = node(i);
    return out;
}

double quadrature(const std::function<double(double)>& f, const Grid1D& grid) {
    double acc = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double v = f(grid.node(i));
        if (!std::isfinite(v)) {
            throw NumericError("quadrature: non-finite integrand at node " + std::to_string(i));
        }
        acc += v;
    }
    return acc * grid.step();
}

double quadrature(const std::function<double(double, double)>& f, const Grid2D& grid) {
    double acc = 0.0;
    for (int i = 0; i < grid.axis0.n; ++i) {
        const double x = grid.axis0.node(i);
        for (int j = 0; j < grid.axis1.n; ++j) {
            const double v = f(x, grid.axis1.node(j));
            if (!std::isfinite(v)) {
                throw NumericError("quadrature: non-finite integrand at node (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            }
            acc += v;
        }
    }
    return acc * grid.axis0.step() * grid.axis1.step();
}

SinkhornResult sinkhorn_ueot(const Eigen::VectorXd& density_p, const Eigen::VectorXd& density_q,
                             const Grid1D& grid_x, const Grid1D& grid_y, double epsilon,
                             const DivergenceSpec& div1, const DivergenceSpec& div2,
                             int max_iter, double tol) {
    if (div1.kind == DivergenceKind::scaled_chi2 || div2.kind == DivergenceKind::scaled_chi2) {
        throw Error("sinkhorn_ueot: scaled_chi2 is not supported, use descend_primal");
    }
    if (density_p.size() != grid_x.n || density_q.size() != grid_y.n) {
        throw DimensionError("sinkhorn_ueot: density length does not match its grid");
    }
    if ((density_p.array() < 0.0).any() || (density_q.array() < 0.0).any()) {
        throw NumericError("sinkhorn_ueot: densities must be nonnegative");
    }

    const int nx = grid_x.n;
    const int ny = grid_y.n;
    const double vx = grid_x.step();
    const double vy = grid_y.step();
    const Eigen::MatrixXd neg_cost_over_eps = -half_sq_cost(grid_x.nodes(), grid_y.nodes()) / epsilon;
    const Eigen::VectorXd log_p = density_p.array().log();
    const Eigen::VectorXd log_q = density_q.array().log();

    // Exact-marginal exponent for balanced sides, softened for scaled-KL.
    auto update_scale = [&](const DivergenceSpec& d) {
        return d.kind == DivergenceKind::balanced ? epsilon
                                                  : d.tau * epsilon / (d.tau + epsilon);
    };
    const double k1 = update_scale(div1);
    const double k2 = update_scale(div2);

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(nx);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(ny);
    double residual = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= max_iter; ++iter) {
        Eigen::VectorXd phi_new(nx);
        for (int i = 0; i < nx; ++i) {
            const double lse =
                log_sum_exp(neg_cost_over_eps.row(i).transpose() + psi / epsilon) + std::log(vy);
            phi_new[i] = -k1 * (lse - log_p[i]);
        }

        Eigen::VectorXd psi_new(ny);
        for (int j = 0; j < ny; ++j) {
            const double lse =
                log_sum_exp(neg_cost_over_eps.col(j) + phi_new / epsilon) + std::log(vx);
            psi_new[j] = -k2 * (lse - log_q[j]);
        }

        residual = std::max((phi_new - phi).cwiseAbs().maxCoeff(),
                            (psi_new - psi).cwiseAbs().maxCoeff());
        phi = phi_new;
        psi = psi_new;
        if (residual <= tol) {
            SinkhornResult out;
            out.phi = phi;
            out.psi = psi;
            out.residual = residual;
            out.iterations = iter;
            out.plan.support_x = grid_x.nodes();
            out.plan.support_y = grid_y.nodes();
            out.plan.cell_volume_x = vx;
            out.plan.cell_volume_y = vy;
            out.plan.masses =
                (((neg_cost_over_eps.colwise() + phi / epsilon).rowwise() +
                  psi.transpose() / epsilon)
                     .array()
                     .exp() *
                 (vx * vy))
                    .matrix();
            return out;
        }
    }
    throw NumericError("sinkhorn_ueot: no convergence after " + std::to_string(max_iter) +
                       " iterations, residual " + std::to_string(residual));
}

double primal_value(const DiscretePlan& plan, const Eigen::VectorXd& density_p,
                    const Eigen::VectorXd& density_q, double epsilon, const DivergenceSpec& div1,
                    const DivergenceSpec& div2) {
    const double vol = plan.cell_volume_x * plan.cell_volume_y;
    const double log_vol = std::log(vol);

    double cost = 0.0;
    double entropy_integral = 0.0; // integral of G log G over the product grid
    for (Eigen::Index i = 0; i < plan.support_x.size(); ++i) {
        for (Eigen::Index j = 0; j < plan.support_y.size(); ++j) {
            const double m = plan.masses(i, j);
            if (m <= 0.0) continue;
            const double d = plan.support_x[i] - plan.support_y[j];
            cost += 0.5 * d * d * m;
            entropy_integral += m * (std::log(m) - log_vol);
        }
    }
    const double mass = plan.total_mass();

    double penalty = 0.0;
    const Eigen::VectorXd mx = plan.marginal_mass_x();
    for (Eigen::Index i = 0; i < mx.size(); ++i) {
        const double pm = density_p[i] * plan.cell_volume_x;
        if (pm > 0.0) penalty += primal_generator(div1, mx[i] / pm) * pm;
    }
    const Eigen::VectorXd my = plan.marginal_mass_y();
    for (Eigen::Index j = 0; j < my.size(); ++j) {
        const double qm = density_q[j] * plan.cell_volume_y;
        if (qm > 0.0) penalty += primal_generator(div2, my[j] / qm) * qm;
    }

    // -eps * H(plan) with H = -integral G log G + mass
    return cost + epsilon * (entropy_integral - mass) + penalty;
}

double dual_value_on_grid(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi,
                          const Grid1D& grid_x, const Grid1D& grid_y,
                          const Eigen::VectorXd& density_p, const Eigen::VectorXd& density_q,
                          double epsilon, const DivergenceSpec& div1, const DivergenceSpec& div2) {
    if (phi.size() != grid_x.n || psi.size() != grid_y.n) {
        throw DimensionError("dual_value_on_grid: potential length does not match its grid");
    }
    const double vx = grid_x.step();
    const double vy = grid_y.step();

    double mass = 0.0;
    for (int i = 0; i < grid_x.n; ++i) {
        for (int j = 0; j < grid_y.n; ++j) {
            const double d = grid_x.node(i) - grid_y.node(j);
            mass += std::exp((phi[i] + psi[j] - 0.5 * d * d) / epsilon);
        }
    }
    mass *= vx * vy;

    double terms = 0.0;
    for (int i = 0; i < grid_x.n; ++i) terms += conjugate(div1, -phi[i]) * density_p[i] * vx;
    for (int j = 0; j < grid_y.n; ++j) terms += conjugate(div2, -psi[j]) * density_q[j] * vy;
    return epsilon * mass + terms;
}

Eigen::VectorXd phi_on_grid(const PlanModel& plan, const Grid1D& grid) {
    Eigen::VectorXd out(grid.n);
    Eigen::VectorXd x(1);
    for (int i = 0; i < grid.n; ++i) {
        x[0] = grid.node(i);
        out[i] = plan.epsilon * (log_density(plan.u, plan.epsilon, x) - log_c_theta(plan, x)) +
                 0.5 * x[0] * x[0];
    }
    return out;
}

Eigen::VectorXd psi_on_grid(const PlanModel& plan, const Grid1D& grid) {
    Eigen::VectorXd out(grid.n);
    Eigen::VectorXd y(1);
    for (int j = 0; j < grid.n; ++j) {
        y[0] = grid.node(j);
        out[j] = plan.epsilon * log_density(plan.v, plan.epsilon, y) + 0.5 * y[0] * y[0];
    }
    return out;
}

double grid_kl_vs_potentials(const DiscretePlan& reference, const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& psi, double epsilon) {
    const double vol = reference.cell_volume_x * reference.cell_volume_y;
    const double log_vol = std::log(vol);

    double cross = 0.0;      // integral of ref * (log ref - log candidate)
    double cand_mass = 0.0;
    for (Eigen::Index i = 0; i < reference.support_x.size(); ++i) {
        for (Eigen::Index j = 0; j < reference.support_y.size(); ++j) {
            const double d = reference.support_x[i] - reference.support_y[j];
            const double log_cand = (phi[i] + psi[j] - 0.5 * d * d) / epsilon;
            cand_mass += std::exp(log_cand) * vol;
            const double m = reference.masses(i, j);
            if (m > 0.0) cross += m * (std::log(m) - log_vol - log_cand);
        }
    }
    return cross - reference.total_mass() + cand_mass;
}

DiscretePlan descend_primal(const Eigen::VectorXd& density_p, const Eigen::VectorXd& density_q,
                            const Grid1D& grid_x, const Grid1D& grid_y, double epsilon,
                            const DivergenceSpec& div1, const DivergenceSpec& div2, int steps,
                            double lr) {
    if (div1.kind == DivergenceKind::balanced || div2.kind == DivergenceKind::balanced) {
        throw Error("descend_primal: balanced marginals are hard constraints, use sinkhorn_ueot");
    }
    const int nx = grid_x.n;
    const int ny = grid_y.n;
    const double vx = grid_x.step();
    const double vy = grid_y.step();
    const double log_vol = std::log(vx * vy);
    const Eigen::MatrixXd cost = half_sq_cost(grid_x.nodes(), grid_y.nodes());
    const Eigen::VectorXd pm = density_p * vx; // cell masses
    const Eigen::VectorXd qm = density_q * vy;

    auto marginal_deriv = [](const DivergenceSpec& d, double ratio) {
        if (d.kind == DivergenceKind::scaled_kl) return d.tau * std::log(ratio);
        return 2.0 * d.tau * (ratio - 1.0);
    };

    // z = log cell masses, initialized at the product plan
    Eigen::MatrixXd z(nx, ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) z(i, j) = std::log(pm[i]) + std::log(qm[j]);

    Eigen::MatrixXd adam_m = Eigen::MatrixXd::Zero(nx, ny);
    Eigen::MatrixXd adam_v = Eigen::MatrixXd::Zero(nx, ny);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    for (int t = 1; t <= steps; ++t) {
        const Eigen::MatrixXd masses = z.array().exp().matrix();
        const Eigen::VectorXd mx = masses.rowwise().sum();
        const Eigen::VectorXd my = masses.colwise().sum();

        Eigen::MatrixXd grad(nx, ny);
        for (int i = 0; i < nx; ++i) {
            const double g1 = marginal_deriv(div1, mx[i] / pm[i]);
            for (int j = 0; j < ny; ++j) {
                const double g2 = marginal_deriv(div2, my[j] / qm[j]);
                const double dU = cost(i, j) + epsilon * (z(i, j) - log_vol) + g1 + g2;
                grad(i, j) = masses(i, j) * dU;
            }
        }

        adam_m = beta1 * adam_m + (1.0 - beta1) * grad;
        adam_v = (beta2 * adam_v.array() + (1.0 - beta2) * grad.array().square()).matrix();
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        z.array() -=
            lr * (adam_m.array() / bc1) / ((adam_v.array() / bc2).sqrt() + adam_eps);
    }

    DiscretePlan out;
    out.masses = z.array().exp().matrix();
    out.support_x = grid_x.nodes();
    out.support_y = grid_y.nodes();
    out.cell_volume_x = vx;
    out.cell_volume_y = vy;
    return out;
}

double exact_w2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("exact_w2: sample counts differ (" + std::to_string(a.rows()) +
                             " vs " + std::to_string(b.rows()) + ")");
    }
    if (a.cols() != b.cols()) throw DimensionError("exact_w2: sample dimensions differ");
    const int n = static_cast<int>(a.rows());
    if (n < 1 || n > 2048) throw DimensionError("exact_w2: sample count must be in [1, 2048]");

    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cost(i, j) = 0.5 * (a.row(i) - b.row(j)).squaredNorm();
        }
    }

    // shortest-augmenting-path assignment with potentials, O(n^3)
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    // sorted accumulation keeps the value identical under argument swap
    std::vector<double> matched;
    matched.reserve(n);
    for (int j = 1; j <= n; ++j) matched.push_back(cost(match[j] - 1, j - 1));
    std::sort(matched.begin(), matched.end());
    const double total = std::accumulate(matched.begin(), matched.end(), 0.0);
    return total / n;
}

} // namespace ulight::oracle

#pragma once

#include <functional>

#include <Eigen/Dense>

#include "ulight/divergence.hpp"
#include "ulight/plan.hpp"

namespace ulight::oracle {

/// Midpoint-rule grid. Nodes sit at cell centers; integration error is
/// O(h^2) for twice-differentiable integrands.
struct Grid1D {
    Grid1D(double lo, double hi, int n);

    double lo;
    double hi;
    int n;

    [[nodiscard]] double step() const { return (hi - lo) / n; }
    [[nodiscard]] double node(int i) const { return lo + (i + 0.5) * step(); }
    [[nodiscard]] Eigen::VectorXd nodes() const;
};

struct Grid2D {
    Grid2D(Grid1D a0, Grid1D a1) : axis0(a0), axis1(a1) {}
    Grid1D axis0;
    Grid1D axis1;
};

/// Midpoint integral; throws NumericError on a non-finite integrand value.
double quadrature(const std::function<double(double)>& f, const Grid1D& grid);
double quadrature(const std::function<double(double, double)>& f, const Grid2D& grid);

/// Nonnegative cell masses over a pair of 1D supports.
struct DiscretePlan {
    Eigen::MatrixXd masses; // n_x x n_y
    Eigen::VectorXd support_x;
    Eigen::VectorXd support_y;
    double cell_volume_x = 1.0;
    double cell_volume_y = 1.0;

    [[nodiscard]] double total_mass() const { return masses.sum(); }
    [[nodiscard]] Eigen::VectorXd marginal_mass_x() const { return masses.rowwise().sum(); }
    [[nodiscard]] Eigen::VectorXd marginal_mass_y() const { return masses.colwise().sum(); }
};

struct SinkhornResult {
    DiscretePlan plan;
    Eigen::VectorXd phi; // dual potential at x nodes
    Eigen::VectorXd psi; // dual potential at y nodes
    double residual = 0.0;
    int iterations = 0;
};

/// Scaling iterations for the discretized relaxed problem on 1D grids.
/// Balanced sides match the marginal exactly per sweep; scaled-KL sides use
/// the softened update with exponent tau/(tau+eps). scaled_chi2 has no
/// closed-form update here and is rejected (validate via descend_primal).
/// Throws NumericError (with the last residual) when max_iter is exceeded.
SinkhornResult sinkhorn_ueot(const Eigen::VectorXd& density_p, const Eigen::VectorXd& density_q,
                             const Grid1D& grid_x, const Grid1D& grid_y, double epsilon,
                             const DivergenceSpec& div1, const DivergenceSpec& div2,
                             int max_iter = 20000, double tol = 1e-9);

/// Discretized primal objective of a plan: transport cost minus eps times
/// the entropy of the plan density (including its +mass term), plus the two
/// marginal penalties. Balanced penalties are counted as zero, so the value
/// is meaningful for feasible (converged) plans only.
double primal_value(const DiscretePlan& plan, const Eigen::VectorXd& density_p,
                    const Eigen::VectorXd& density_q, double epsilon, const DivergenceSpec& div1,
                    const DivergenceSpec& div2);

/// Dual objective in the L-convention (its negative is the usual dual):
/// eps * mass of the reconstructed plan exp{(phi + psi - cost)/eps}
/// + sum_i conj1(-phi_i) p_i vol_x + sum_j conj2(-psi_j) q_j vol_y.
double dual_value_on_grid(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi,
                          const Grid1D& grid_x, const Grid1D& grid_y,
                          const Eigen::VectorXd& density_p, const Eigen::VectorXd& density_q,
                          double epsilon, const DivergenceSpec& div1, const DivergenceSpec& div2);

/// Parametrized-plan potentials evaluated at the nodes of a 1D grid.
Eigen::VectorXd phi_on_grid(const PlanModel& plan, const Grid1D& grid);
Eigen::VectorXd psi_on_grid(const PlanModel& plan, const Grid1D& grid);

/// Generalized KL divergence (positive-measure form, with mass terms)
/// between reference cell masses and the plan reconstructed from (phi, psi)
/// at the same nodes.
double grid_kl_vs_potentials(const DiscretePlan& reference, const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& psi, double epsilon);

/// Generic convex-descent route for the discretized primal: Adam on the
/// log-masses. Supports scaled_kl and scaled_chi2 penalties.
DiscretePlan descend_primal(const Eigen::VectorXd& density_p, const Eigen::VectorXd& density_q,
                            const Grid1D& grid_x, const Grid1D& grid_y, double epsilon,
                            const DivergenceSpec& div1, const DivergenceSpec& div2,
                            int steps = 30000, double lr = 0.05);

/// Mean optimal-assignment cost (1/n) min_sigma sum_i |a_i - b_sigma(i)|^2/2
/// between equal-size sample sets, n <= 2048. Exact and deterministic
/// (shortest augmenting path); the matched costs are summed in sorted order
/// so the value is bit-identical under argument swap.
double exact_w2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace ulight::oracle

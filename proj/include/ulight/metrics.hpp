#pragma once

#include <Eigen/Dense>

#include "ulight/plan.hpp"
#include "ulight/rng.hpp"

namespace ulight::metrics {

struct OtCostEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte-Carlo transport cost of the learned conditionals: mean over
/// samples, conditional draws and coordinates of (x_i - y_i)^2 / 2, i.e.
/// E |x - y|^2 / (2 d). The per-coordinate averaging matches the reference
/// results this solver is validated against.
OtCostEstimate normalized_ot_cost(const PlanModel& plan, const Eigen::MatrixXd& samples_x,
                                  int draws_per_x, Rng& rng);

/// Row-normalized frequency matrix: row r, column c is the fraction of
/// samples nearest (Euclidean) to source center r whose generated pair is
/// nearest to target center c.
Eigen::MatrixXd mode_assignment(const Eigen::MatrixXd& samples_from,
                                const Eigen::MatrixXd& generated,
                                const Eigen::MatrixXd& centers_src,
                                const Eigen::MatrixXd& centers_tgt);

/// Empirical transport distance sqrt((1/n) min-assignment sum |a-b|^2 / 2)
/// on equal-size subsamples (exact assignment, deterministic given rng).
double w2_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int subsample, Rng& rng);

struct MetricReport {
    double ot_cost = 0.0;
    double ot_cost_se = 0.0;
    double w2 = 0.0;
    double learned_mass = 0.0;
    Eigen::MatrixXd mode_matrix; // empty when no centers were supplied
};

struct EvaluateOptions {
    int draws_per_x = 1;
    int w2_subsample = 1024;
    Eigen::MatrixXd centers_src; // optional mode centers for the matrix
    Eigen::MatrixXd centers_tgt;
};

MetricReport evaluate_plan(const PlanModel& plan, const Eigen::MatrixXd& samples_x,
                           const Eigen::MatrixXd& samples_y, const EvaluateOptions& options,
                           Rng& rng);

} // namespace ulight::metrics

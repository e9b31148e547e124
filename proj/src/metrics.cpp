#include "ulight/metrics.hpp"

#include <cmath>
#include <vector>

#include "ulight/errors.hpp"
#include "ulight/oracle.hpp"

namespace ulight::metrics {

namespace {

Eigen::Index nearest_center(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& point) {
    Eigen::Index best = 0;
    double best_d = (centers.row(0) - point).squaredNorm();
    for (Eigen::Index r = 1; r < centers.rows(); ++r) {
        const double d = (centers.row(r) - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = r;
        }
    }
    return best;
}

// distinct row indices, deterministic given the rng state
std::vector<Eigen::Index> subsample_indices(Eigen::Index total, int count, Rng& rng) {
    std::vector<Eigen::Index> order(total);
    for (Eigen::Index i = 0; i < total; ++i) order[i] = i;
    for (Eigen::Index i = total - 1; i > 0; --i) {
        std::swap(order[i], order[rng.integer(static_cast<std::uint64_t>(i) + 1)]);
    }
    order.resize(std::min<Eigen::Index>(total, count));
    return order;
}

} // namespace

OtCostEstimate normalized_ot_cost(const PlanModel& plan, const Eigen::MatrixXd& samples_x,
                                  int draws_per_x, Rng& rng) {
    if (samples_x.rows() < 1) throw DimensionError("normalized_ot_cost: empty sample set");
    const double d = static_cast<double>(samples_x.cols());

    double sum = 0.0;
    double sum_sq = 0.0;
    const long count = samples_x.rows() * draws_per_x;
    for (Eigen::Index i = 0; i < samples_x.rows(); ++i) {
        const Eigen::VectorXd x = samples_x.row(i);
        const ConditionalMixture cond = conditional(plan, x);
        const Eigen::MatrixXd ys = cond.sample(rng, draws_per_x);
        for (int t = 0; t < draws_per_x; ++t) {
            const double c = (ys.row(t) - x.transpose()).squaredNorm() / (2.0 * d);
            sum += c;
            sum_sq += c * c;
        }
    }
    OtCostEstimate out;
    out.mean = sum / count;
    if (count > 1) {
        const double var = (sum_sq - sum * sum / count) / (count - 1);
        out.standard_error = std::sqrt(std::max(var, 0.0) / count);
    }
    return out;
}

Eigen::MatrixXd mode_assignment(const Eigen::MatrixXd& samples_from,
                                const Eigen::MatrixXd& generated,
                                const Eigen::MatrixXd& centers_src,
                                const Eigen::MatrixXd& centers_tgt) {
    if (centers_src.rows() == 0 || centers_tgt.rows() == 0) {
        throw DimensionError("mode_assignment: center sets must be non-empty");
    }
    if (samples_from.rows() != generated.rows()) {
        throw DimensionError("mode_assignment: sample/generated counts differ");
    }
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(centers_src.rows(), centers_tgt.rows());
    for (Eigen::Index i = 0; i < samples_from.rows(); ++i) {
        const Eigen::Index r = nearest_center(centers_src, samples_from.row(i));
        const Eigen::Index c = nearest_center(centers_tgt, generated.row(i));
        counts(r, c) += 1.0;
    }
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        const double total = counts.row(r).sum();
        if (total > 0.0) counts.row(r) /= total;
    }
    return counts;
}

double w2_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int subsample, Rng& rng) {
    const auto ia = subsample_indices(a.rows(), subsample, rng);
    const auto ib = subsample_indices(b.rows(), subsample, rng);
    const Eigen::Index n = std::min(ia.size(), ib.size());
    Eigen::MatrixXd sa(n, a.cols());
    Eigen::MatrixXd sb(n, b.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        sa.row(i) = a.row(ia[i]);
        sb.row(i) = b.row(ib[i]);
    }
    return std::sqrt(oracle::exact_w2(sa, sb));
}

MetricReport evaluate_plan(const PlanModel& plan, const Eigen::MatrixXd& samples_x,
                           const Eigen::MatrixXd& samples_y, const EvaluateOptions& options,
                           Rng& rng) {
    MetricReport report;
    const OtCostEstimate cost = normalized_ot_cost(plan, samples_x, options.draws_per_x, rng);
    report.ot_cost = cost.mean;
    report.ot_cost_se = cost.standard_error;
    report.learned_mass = total_mass(plan.u);

    // one conditional draw per sample, reused for the mode matrix and W2
    Eigen::MatrixXd generated(samples_x.rows(), samples_x.cols());
    for (Eigen::Index i = 0; i < samples_x.rows(); ++i) {
        const ConditionalMixture cond = conditional(plan, samples_x.row(i));
        generated.row(i) = cond.sample(rng, 1);
    }

    report.w2 = w2_distance(generated, samples_y, options.w2_subsample, rng);
    if (options.centers_src.rows() > 0 && options.centers_tgt.rows() > 0) {
        report.mode_matrix =
            mode_assignment(samples_x, generated, options.centers_src, options.centers_tgt);
    }
    return report;
}

} // namespace ulight::metrics

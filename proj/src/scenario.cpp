#include "ulight/scenario.hpp"

#include <cmath>

#include "ulight/errors.hpp"

namespace ulight {

namespace {

GaussianMixture mixture_2d(const std::vector<double>& weights,
                           const std::vector<std::pair<double, double>>& centers,
                           const std::vector<double>& variances) {
    const int c = static_cast<int>(weights.size());
    double total = 0.0;
    for (double w : weights) total += w;
    GaussianMixture m;
    m.dim = 2;
    m.log_weights.resize(c);
    m.means.resize(c, 2);
    m.log_diag_covs.resize(c, 2);
    for (int k = 0; k < c; ++k) {
        m.log_weights[k] = std::log(weights[k] / total);
        m.means(k, 0) = centers[k].first;
        m.means(k, 1) = centers[k].second;
        m.log_diag_covs.row(k).setConstant(std::log(variances[k]));
    }
    return m;
}

Eigen::MatrixXd centers_matrix(const std::vector<std::pair<double, double>>& centers) {
    Eigen::MatrixXd out(centers.size(), 2);
    for (std::size_t k = 0; k < centers.size(); ++k) {
        out(k, 0) = centers[k].first;
        out(k, 1) = centers[k].second;
    }
    return out;
}

} // namespace

Scenario make_scenario(const std::string& name) {
    const std::vector<std::pair<double, double>> src_modes = {{-3.0, 3.0}, {1.0, 3.0}};
    const std::vector<std::pair<double, double>> tgt_modes = {{-3.0, 0.0}, {1.0, 0.0}};

    Scenario s;
    s.centers_source = centers_matrix(src_modes);
    s.centers_target = centers_matrix(tgt_modes);

    if (name == "gauss_mix") {
        s.source = mixture_2d({0.25, 0.75}, src_modes, {0.1, 0.1});
        s.target = mixture_2d({0.75, 0.25}, tgt_modes, {0.1, 0.1});
        return s;
    }
    if (name == "gauss_mix_outliers") {
        // outlier components sit >= 5 sigma away from every main mode
        auto src = src_modes;
        auto tgt = tgt_modes;
        src.emplace_back(-6.0, -3.0);
        tgt.emplace_back(6.0, 6.0);
        s.source = mixture_2d({0.25, 0.75, 0.05}, src, {0.1, 0.1, 0.01});
        s.target = mixture_2d({0.75, 0.25, 0.05}, tgt, {0.1, 0.1, 0.01});
        return s;
    }
    throw IoError("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
    return {"gauss_mix", "gauss_mix_outliers"};
}

} // namespace ulight

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ulight/gmm.hpp"

namespace ulight {

/// Built-in data-generation scenario: a pair of probability measures given
/// as normalized Gaussian mixtures (sample them with epsilon = 1), plus the
/// main mode centers used by the transport diagnostics.
struct Scenario {
    GaussianMixture source;
    GaussianMixture target;
    Eigen::MatrixXd centers_source;
    Eigen::MatrixXd centers_target;
};

/// "gauss_mix": two-mode 2D mixtures with flipped 1:3 weights.
/// "gauss_mix_outliers": same, plus a small far-away outlier component
/// (weight 0.05, variance 0.01) on each side.
Scenario make_scenario(const std::string& name);

std::vector<std::string> scenario_names();

} // namespace ulight

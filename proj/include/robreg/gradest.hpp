#pragma once

#include <cstdint>

#include "robreg/dataset.hpp"
#include "robreg/packsdp.hpp"

namespace robreg {

/// Per-sample least-squares gradients at w: row i is (<x_i, w> - y_i) x_i.
Eigen::MatrixXd gradients(const Dataset& data, const Eigen::VectorXd& w);

struct GradientEstimate {
  Eigen::VectorXd g_hat;
  MtSolution diag;
};

/// Solver slack used for a corruption fraction eta: 5*eta, capped at the
/// solver's supported range.
double gradient_removal_slack(double eta);

/// Robust gradient: weighted mean of the per-sample gradients under the
/// min-max second-moment weights (corruption budget eta, solver slack 5*eta).
GradientEstimate estimate_gradient(const Dataset& data, const Eigen::VectorXd& w,
                                   double eta, const MtOptions& opts = {});

}  // namespace robreg

#include "robreg/gradest.hpp"

#include <cmath>
#include <stdexcept>

namespace robreg {

Eigen::MatrixXd gradients(const Dataset& data, const Eigen::VectorXd& w) {
  if (w.size() != data.d()) {
    throw std::invalid_argument("gradients: dimension mismatch");
  }
  const Eigen::VectorXd residual = data.covariates() * w - data.responses();
  return residual.asDiagonal() * data.covariates();
}

double gradient_removal_slack(double eta) {
  // 5x the corruption fraction, capped so the output simplex Delta_{2*delta}
  // always spans at least half the sample. Uncapped slack past eta = 0.05
  // lets the solver concentrate all mass on a third of the points, which
  // shrinks the estimated gradient badly on clean data.
  return std::min(5.0 * eta, 0.25);
}

GradientEstimate estimate_gradient(const Dataset& data, const Eigen::VectorXd& w,
                                   double eta, const MtOptions& opts) {
  if (eta <= 0.0 || eta > 0.1) {
    throw std::invalid_argument("estimate_gradient: eta outside (0, 0.1]");
  }
  // Even capped, the slack stays well above eta, which is what soundness needs.
  const double delta = gradient_removal_slack(eta);
  if (static_cast<double>(data.n()) < 2.0 / (1.0 - 2.0 * delta)) {
    throw std::invalid_argument("estimate_gradient: too few samples for this eta");
  }

  GradientEstimate out;
  Eigen::MatrixXd g = gradients(data, w);
  if (g.rowwise().squaredNorm().maxCoeff() <= 0.0) {
    // Exact interpolation: every per-sample gradient vanishes and any weights
    // give the zero mean, so skip the solve.
    out.g_hat = Eigen::VectorXd::Zero(data.d());
    out.diag.weights.delta = 2.0 * delta;
    out.diag.weights.s = uniform_weights(data.n());
    return out;
  }

  const VectorSet zs(std::move(g));
  out.diag = solve_mt(zs, delta, opts);
  out.g_hat = zs.rows().transpose() * out.diag.weights.s;
  return out;
}

}  // namespace robreg

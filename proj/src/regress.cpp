#include "robreg/regress.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>

#include "robreg/gradest.hpp"
#include "robreg/rng.hpp"
#include "robreg/stats.hpp"

namespace robreg {

int ht_iteration_count(double eta, double sigma_hint, double kappa_hint,
                       double w_norm_hint) {
  const double top = std::max(w_norm_hint, 1.0);
  const double bottom = std::sqrt(eta) * sigma_hint * kappa_hint;
  const double raw = 2.0 * kappa_hint * std::log(top / bottom);
  const auto t = static_cast<int>(std::ceil(raw));
  return std::clamp(t, 1, 200);
}

double mad_sigma(const Eigen::VectorXd& y) {
  std::vector<double> values(y.data(), y.data() + y.size());
  const double center = median(values);
  for (double& v : values) v = std::abs(v - center);
  return std::max(1.4826 * median(std::move(values)), 1e-6);
}

double trimmed_ols_norm_hint(const Dataset& data) {
  const Eigen::Index n = data.n();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const Eigen::VectorXd norms = data.covariates().rowwise().squaredNorm();
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return norms(a) < norms(b);
  });
  const Eigen::Index keep = (n + 1) / 2;

  Eigen::MatrixXd x(keep, data.d());
  Eigen::VectorXd y(keep);
  for (Eigen::Index r = 0; r < keep; ++r) {
    x.row(r) = data.covariates().row(idx[static_cast<std::size_t>(r)]);
    y(r) = data.responses()(idx[static_cast<std::size_t>(r)]);
  }
  const Eigen::VectorXd w =
      (x.transpose() * x).ldlt().solve(x.transpose() * y);
  return w.allFinite() ? w.norm() : 0.0;
}

Eigen::VectorXd fit_ols(const Dataset& data) {
  const Eigen::MatrixXd& x = data.covariates();
  return (x.transpose() * x).ldlt().solve(x.transpose() * data.responses());
}

FitReport fit_ht(const Dataset& data, const HtConfig& cfg) {
  if (cfg.eta <= 0.0 || cfg.eta > 0.1) {
    throw std::invalid_argument("fit_ht: eta outside (0, 0.1]");
  }
  if (cfg.kappa_hint < 1.0) {
    throw std::invalid_argument("fit_ht: kappa hint must be >= 1");
  }
  if (cfg.step <= 0.0 || cfg.step >= 2.0) {
    throw std::invalid_argument("fit_ht: step outside (0, 2)");
  }

  const auto t_start = std::chrono::steady_clock::now();
  FitReport report;

  double sigma_hint = cfg.sigma_hint;
  if (sigma_hint <= 0.0) {
    sigma_hint = mad_sigma(data.responses());
    report.hints_defaulted.push_back("sigma");
  }
  double w_norm_hint = cfg.w_norm_hint;
  if (w_norm_hint <= 0.0) {
    w_norm_hint = trimmed_ols_norm_hint(data);
    report.hints_defaulted.push_back("w_norm");
  }
  if (cfg.kappa_hint * cfg.kappa_hint * cfg.eta > 0.05) {
    report.warnings.push_back(
        "kappa^2 * eta exceeds 0.05; the contraction argument is out of range");
  }
  if (cfg.eta > 1.0 / 30.0) {
    report.warnings.push_back(
        "eta beyond 1/30; the removal slack saturates at 1/4");
  }

  const Rng rng(cfg.seed);
  double scale = 1.0;
  Eigen::MatrixXd x_scaled;
  const Dataset* active = &data;
  Dataset rescaled_storage(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  if (cfg.auto_rescale) {
    MtOptions mopts;
    mopts.seed = rng.derive(0xac);
    const MtSolution cov = solve_mt(VectorSet(data.covariates()),
                                    5.0 * cfg.eta, mopts);
    if (cov.achieved > 0.0) {
      scale = std::sqrt(cov.achieved);
      rescaled_storage = Dataset(data.covariates() / scale, data.responses());
      active = &rescaled_storage;
      report.warnings.push_back("covariates rescaled by robust spectral norm");
    }
  }

  const int t_total =
      cfg.t_override.value_or(ht_iteration_count(cfg.eta, sigma_hint,
                                                 cfg.kappa_hint, w_norm_hint));
  const int restarts = std::max(
      3, static_cast<int>(std::ceil(std::log2(static_cast<double>(t_total)))) + 3);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(data.d());
  for (int t = 0; t < t_total; ++t) {
    // A runaway iterate would overflow inside the gradient solver before the
    // post-step finiteness check sees it; bail out while the trace is usable.
    if (w.norm() > 1e100) {
      report.w_hat = w;
      report.t_used = t;
      throw DivergenceError("fit_ht: iterate diverged", std::move(report));
    }
    const auto iter_start = std::chrono::steady_clock::now();
    MtOptions mopts;
    mopts.restarts = restarts;
    mopts.spectral_tol = cfg.spectral_tol;
    mopts.collect_trace = cfg.collect_mt_trace;
    mopts.seed = rng.derive(static_cast<std::uint64_t>(t) + 1);
    const GradientEstimate est = estimate_gradient(*active, scale * w, cfg.eta, mopts);

    // Report in original coordinates: the rescaled model sees w' = scale * w.
    const Eigen::VectorXd g = (cfg.step / scale) * est.g_hat;
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - iter_start)
                          .count();
    report.trace.push_back({t, w, g.norm(), est.diag.achieved, ms});

    w -= g;
    if (!w.allFinite()) {
      report.w_hat = report.trace.back().w;
      report.t_used = t;
      throw DivergenceError("fit_ht: iterate diverged", std::move(report));
    }
  }
  report.trace.push_back({t_total, w, 0.0, 0.0, 0.0});

  report.w_hat = w;
  report.t_used = t_total;
  if (data.truth()) {
    report.error_vs_truth = (w - data.truth()->w_star).norm();
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return report;
}

}  // namespace robreg

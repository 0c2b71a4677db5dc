#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robreg/dataset.hpp"
#include "robreg/packsdp.hpp"

namespace robreg {

struct HtConfig {
  double eta = 0.02;
  double sigma_hint = 0.0;   // <= 0: median absolute deviation of y
  double kappa_hint = 1.0;
  double w_norm_hint = 0.0;  // <= 0: OLS on the half with smallest ||x||
  double step = 1.0;
  std::optional<int> t_override;
  double spectral_tol = 1e-3;
  bool auto_rescale = false;
  bool collect_mt_trace = false;
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iter = 0;
  Eigen::VectorXd w;   // iterate before the step; the step is grad itself
  double grad_norm = 0.0;
  double lambda = 0.0;  // solver objective at this iterate
  double ms = 0.0;
};

struct FitReport {
  Eigen::VectorXd w_hat;
  int t_used = 0;
  std::vector<IterationRecord> trace;  // t_used + 1 records, final has grad 0
  std::optional<double> error_vs_truth;
  double seconds = 0.0;
  std::vector<std::string> hints_defaulted;
  std::vector<std::string> warnings;
  // stage-split driver extras
  std::optional<Eigen::VectorXd> w_dagger;
  std::optional<double> correction_norm;
  std::optional<Eigen::Index> n1;
  std::optional<Eigen::Index> survivors;
  std::vector<Eigen::Index> stage1_indices;
  std::vector<Eigen::Index> stage2_indices;
};

struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, FitReport partial_arg)
      : std::runtime_error(what), partial(std::move(partial_arg)) {}
  FitReport partial;
};

/// Number of descent steps: ceil(2*kappa*log(max(w_norm,1)/(sqrt(eta)*sigma*kappa)))
/// clamped to [1, 200].
int ht_iteration_count(double eta, double sigma_hint, double kappa_hint,
                       double w_norm_hint);

double mad_sigma(const Eigen::VectorXd& y);
double trimmed_ols_norm_hint(const Dataset& data);

/// Robust gradient descent from zero under variance-bounded noise. Error
/// floor scales as sqrt(eta)*sigma*kappa.
FitReport fit_ht(const Dataset& data, const HtConfig& cfg);

/// Ordinary least squares via the normal equations (baseline, not robust).
Eigen::VectorXd fit_ols(const Dataset& data);

}  // namespace robreg

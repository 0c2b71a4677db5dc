#pragma once

#include <cstdint>

#include "robreg/regress.hpp"

namespace robreg {

struct SgConfig {
  double eta = 0.02;
  double sigma_hint = 0.0;
  double nu = 1.0;             // pilot-quality constant, must be positive
  double c1 = 10.0;            // stage-1 truncation threshold constant
  Eigen::Index n1_cap = 0;     // 0: no extra cap on the stage-1 size
  double min_survival = 0.95;  // required fraction surviving truncation
  HtConfig ht;                 // eta and seed are overridden by the driver
  std::uint64_t seed = 0;
};

/// Stage-1 sample count: min(ceil(n/2), ceil(20 d ln(d+1) / eta), n1_cap).
Eigen::Index sg_stage1_count(Eigen::Index n, Eigen::Index d, double eta,
                             Eigen::Index n1_cap);

struct SgCorrection {
  Eigen::VectorXd correction;
  Eigen::VectorXd transformed;  // responses recentred by the pilot fit
  MtSolution diag;
};

/// One-shot refinement: recentre responses by the pilot w, weight the
/// per-sample vectors y'_i x_i by the min-max second-moment weights
/// (slack 3*eta), and return their weighted mean.
SgCorrection sg_correction(const Dataset& part2, const Eigen::VectorXd& w_pilot,
                           double eta, std::uint64_t seed,
                           const MtOptions& opts = {});

/// Two-stage estimator: truncated heavy-tailed pilot fit on a small split,
/// then a single robust correction on the rest. Error floor scales as
/// sigma*eta*sqrt(log 1/eta) for sub-Gaussian noise.
FitReport fit_sg(const Dataset& data, const SgConfig& cfg);

}  // namespace robreg

#include "robreg/subgauss.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "robreg/gradest.hpp"
#include "robreg/preprocess.hpp"
#include "robreg/rng.hpp"

namespace robreg {

Eigen::Index sg_stage1_count(Eigen::Index n, Eigen::Index d, double eta,
                             Eigen::Index n1_cap) {
  const auto half = static_cast<Eigen::Index>(
      std::ceil(static_cast<double>(n) / 2.0));
  const auto budget = static_cast<Eigen::Index>(
      std::ceil(20.0 * static_cast<double>(d) *
                std::log(static_cast<double>(d) + 1.0) / eta));
  Eigen::Index n1 = std::min(half, budget);
  if (n1_cap > 0) n1 = std::min(n1, n1_cap);
  return n1;
}

SgCorrection sg_correction(const Dataset& part2, const Eigen::VectorXd& w_pilot,
                           double eta, std::uint64_t seed,
                           const MtOptions& opts) {
  if (w_pilot.size() != part2.d()) {
    throw std::invalid_argument("sg_correction: dimension mismatch");
  }
  SgCorrection out;
  out.transformed = part2.responses() - part2.covariates() * w_pilot;

  Eigen::MatrixXd g = out.transformed.asDiagonal() * part2.covariates();
  if (g.size() == 0 || g.rowwise().squaredNorm().maxCoeff() <= 0.0) {
    out.correction = Eigen::VectorXd::Zero(part2.d());
    out.diag.weights.delta = 6.0 * eta;
    out.diag.weights.s = uniform_weights(part2.n());
    return out;
  }

  MtOptions mt = opts;
  mt.seed = seed;
  const VectorSet zs(std::move(g));
  out.diag = solve_mt(zs, 3.0 * eta, mt);
  out.correction = zs.rows().transpose() * out.diag.weights.s;
  return out;
}

FitReport fit_sg(const Dataset& data, const SgConfig& cfg) {
  if (cfg.eta <= 0.0 || cfg.eta > 1.0 / 9.0) {
    throw std::invalid_argument("fit_sg: eta outside (0, 1/9]");
  }
  if (cfg.nu <= 0.0) {
    throw std::invalid_argument("fit_sg: nu must be positive");
  }
  if (cfg.min_survival <= 0.0 || cfg.min_survival > 1.0) {
    throw std::invalid_argument("fit_sg: bad survival threshold");
  }
  const Eigen::Index n = data.n();
  if (n < 4) throw std::invalid_argument("fit_sg: need at least 4 samples");

  const auto t_start = std::chrono::steady_clock::now();
  const Rng rng(cfg.seed);
  const Eigen::Index n1 = sg_stage1_count(n, data.d(), cfg.eta, cfg.n1_cap);
  const SplitResult parts = split(data, n1, rng.derive(1));

  const TruncationResult trunc = truncate(parts.part1, {cfg.c1});
  const auto survivors = trunc.kept.n();
  if (static_cast<double>(survivors) <
      cfg.min_survival * static_cast<double>(n1)) {
    throw std::runtime_error(
        "fit_sg: truncation removed more than the allowed fraction of stage 1");
  }

  HtConfig ht = cfg.ht;
  ht.eta = cfg.eta;
  ht.seed = rng.derive(2);
  if (ht.sigma_hint <= 0.0) ht.sigma_hint = cfg.sigma_hint;
  FitReport report = fit_ht(trunc.kept, ht);
  const Eigen::VectorXd w_pilot = report.w_hat;

  MtOptions mt;
  mt.spectral_tol = ht.spectral_tol;
  const SgCorrection corr =
      sg_correction(parts.part2, w_pilot, cfg.eta, rng.derive(3), mt);

  report.w_hat = w_pilot + corr.correction;
  report.w_dagger = w_pilot;
  report.correction_norm = corr.correction.norm();
  report.n1 = n1;
  report.survivors = survivors;
  report.stage1_indices = parts.indices1;
  report.stage2_indices = parts.indices2;
  if (data.truth()) {
    report.error_vs_truth = (report.w_hat - data.truth()->w_star).norm();
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return report;
}

}  // namespace robreg

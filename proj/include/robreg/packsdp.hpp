#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "robreg/spectral.hpp"

namespace robreg {

/// Capped average of the (1-delta)n smallest squared norms: the objective of
/// the mass-first packing point. Always within [opt, d*opt] of the true
/// min-max value opt.
double l_star(const VectorSet& zs, double delta);

/// The box-feasible point that spends the full unit mass on the smallest
/// scores (caps filled in ascending score order).
Eigen::VectorXd capped_min_weights(const Eigen::VectorXd& scores, double delta);

struct PackOptions {
  double spectral_tol = 1e-3;    // relative slack allowed on the lambda cap
  double power_tol = 1e-3;       // eigenvalue tolerance inside the loop
  int power_iteration_cap = 300; // per-round budget, partial results accepted
  int max_rounds = 0;            // 0 -> ceil(40/delta)
  double objective_floor = 0.0;  // early exit once mass cannot matter
  std::uint64_t seed = 0;
  const Eigen::VectorXd* warm_start = nullptr;  // initial spectral direction
};

struct PackResult {
  BoxWeights weights;
  double objective = 0.0;
  double lambda_estimate = 0.0;
  Eigen::VectorXd direction;  // last top-eigenvector estimate
  int rounds = 0;
  int power_iterations = 0;  // summed over rounds
  bool feasible = false;
};

struct PackError : std::runtime_error {
  PackError(const std::string& what, PackResult best_arg)
      : std::runtime_error(what), best(std::move(best_arg)) {}
  PackResult best;
};

/// Spectral filter for the packing program: maximize total mass subject to
/// the box caps and lambda_max of the weighted second moment staying at most
/// lambda (up to spectral_tol). Infeasible iterates are shaved along the top
/// eigendirection, feasible ones are grown back toward the caps; the best
/// feasible iterate by mass wins. An objective floor, if set, allows an early
/// infeasible return once the mass collapses to half the floor.
PackResult solve_pack(const VectorSet& zs, double delta, double lambda,
                      const PackOptions& opts = {});

/// Rescales a packing point with mass at least 1 - delta/10 into the
/// 2*delta-capped simplex. The spectral objective grows by at most the
/// inverse mass, i.e. a (1 + delta/2) factor.
SimplexWeights pack_to_mt(const BoxWeights& weights, double delta, double lambda);

struct MtRound {
  double lambda_mid = 0.0;
  double objective = 0.0;
  double lambda_estimate = 0.0;
  bool kept_high = false;
  int pack_rounds = 0;
  int pack_iterations = 0;
};

struct MtOptions {
  int restarts = 3;
  double spectral_tol = 1e-3;
  bool collect_trace = false;
  std::uint64_t seed = 0;
};

struct MtSolution {
  SimplexWeights weights;
  double achieved = 0.0;  // lambda_max at the returned weights
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  int rounds = 0;
  std::vector<MtRound> trace;
};

/// Binary search over lambda with solve_pack probes; the returned weights lie
/// in the 2*delta simplex and achieve at most (1+delta) times the min over
/// the delta simplex. Restarts keep the smallest achieved value.
MtSolution solve_mt(const VectorSet& zs, double delta, const MtOptions& opts = {});

}  // namespace robreg

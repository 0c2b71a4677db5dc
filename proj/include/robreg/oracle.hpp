#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "robreg/spectral.hpp"

namespace robreg {

/// Total variation distance 1/2 * sum |a_i - b_i| between two weight vectors.
/// Both must be probability vectors (sum 1 within 1e-9).
double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// One extreme point of Delta_delta: the cap on exactly (1-delta)n coordinates.
struct DecompositionAtom {
  std::vector<Eigen::Index> support;  // sorted, size (1-delta)n
  double gamma = 0.0;
};

struct Decomposition {
  std::vector<DecompositionAtom> atoms;
  double delta = 0.0;
  Eigen::Index n = 0;

  Eigen::VectorXd reconstruct() const;
};

/// Greedy Caratheodory-style decomposition of s in Delta_delta (delta*n must
/// be an integer) into at most n+1 extreme points.
Decomposition decompose(const SimplexWeights& s);

/// Euclidean projection onto {0 <= s_i <= cap, sum s_i = 1}.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& x, double cap);

/// Random member of Delta_delta, exactly feasible (used by test harnesses).
Eigen::VectorXd random_simplex_weights(Eigen::Index n, double delta, std::uint64_t seed);

/// Dense top eigenvalue of M(s); d must be small. Reference oracle.
double dense_lambda_max(const VectorSet& zs, const Eigen::VectorXd& s);

struct BruteOptions {
  int restarts = 20;
  int total_iterations = 100000;  // split across restarts
  int grid_resolution = 64;       // simplex grid used when n <= grid_max_n
  Eigen::Index grid_max_n = 5;
  std::uint64_t seed = 0;
};

/// Reference optimum of (MT) on tiny instances: projected-subgradient descent
/// on s -> lambda_max(M(s)) over Delta_delta, cross-checked against a simplex
/// grid scan when n is small enough; returns the smaller certificate.
double brute_mt(const VectorSet& zs, double delta, const BruteOptions& opts = {});

/// The two component certificates, for cross-oracle agreement tests.
double brute_mt_subgradient(const VectorSet& zs, double delta, const BruteOptions& opts = {});
std::optional<double> brute_mt_grid(const VectorSet& zs, double delta, int resolution = 64);

}  // namespace robreg

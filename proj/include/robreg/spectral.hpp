#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>

namespace robreg {

/// Compensated (Neumaier) summation; keeps weight-sum checks at machine
/// precision independent of n.
double compensated_sum(const Eigen::VectorXd& v);

/// Box-constrained weights for the packing program: 0 <= s_i <= 1/((1-delta)n),
/// no sum constraint.
struct BoxWeights {
  Eigen::VectorXd s;
  double delta = 0.0;

  double cap() const { return 1.0 / ((1.0 - delta) * static_cast<double>(s.size())); }
  double total() const { return compensated_sum(s); }
};

/// Member of the capped simplex Delta_delta: sum 1, entries <= 1/((1-delta)n).
struct SimplexWeights {
  Eigen::VectorXd s;
  double delta = 0.0;

  double cap() const { return 1.0 / ((1.0 - delta) * static_cast<double>(s.size())); }
};

/// Exact feasibility checks (plain comparisons on caps; sum to 1e-12).
bool box_feasible(const BoxWeights& w);
bool simplex_member(const SimplexWeights& w);

Eigen::VectorXd uniform_weights(Eigen::Index n);

/// The points Z_1..Z_n defining M(s) = sum_i s_i Z_i Z_i^T. Rows are the Z_i.
class VectorSet {
 public:
  explicit VectorSet(Eigen::MatrixXd rows);

  Eigen::Index size() const { return z_.rows(); }
  Eigen::Index dim() const { return z_.cols(); }
  const Eigen::MatrixXd& rows() const { return z_; }
  const Eigen::VectorXd& squared_norms() const { return sq_norms_; }

  /// M(s)·v in O(nd) without materializing the d x d matrix.
  Eigen::VectorXd apply_second_moment(const Eigen::VectorXd& s, const Eigen::VectorXd& v) const;

  /// Dense d x d moment matrix; for small d and tests.
  Eigen::MatrixXd second_moment(const Eigen::VectorXd& s) const;

 private:
  Eigen::MatrixXd z_;
  Eigen::VectorXd sq_norms_;
};

struct SpectralCertificate {
  double lambda = 0.0;
  Eigen::VectorXd v;
  double residual = 0.0;
  int iterations = 0;
};

struct PowerOptions {
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// 0 = the default cap 10*ceil(log(d*n)/tol).
  int max_iterations = 0;
  /// When set, return the best iterate at the cap instead of throwing
  /// (used by the solver loop, which only needs a one-sided estimate).
  bool allow_partial = false;
  /// Optional warm-start direction (unit length not required).
  const Eigen::VectorXd* warm_start = nullptr;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SpectralCertificate best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  SpectralCertificate best_iterate;
};

/// Top eigenvalue of M(s) by seeded power iteration. The returned lambda is a
/// Rayleigh quotient, so it never exceeds the true maximum; on convergence it
/// is within tol*lambda_max below it.
SpectralCertificate lambda_max(const VectorSet& zs, const Eigen::VectorXd& s,
                               const PowerOptions& opts = {});

}  // namespace robreg

#include "robreg/spectral.hpp"

#include <cmath>

#include "robreg/rng.hpp"

namespace robreg {

double compensated_sum(const Eigen::VectorXd& v) {
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double x = v(i);
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

bool box_feasible(const BoxWeights& w) {
  if (w.delta <= 0.0 || w.delta > 1.0 / 3.0) return false;
  const double cap = w.cap();
  return (w.s.array() >= 0.0).all() && (w.s.array() <= cap).all();
}

bool simplex_member(const SimplexWeights& w) {
  if (w.delta <= 0.0 || w.delta >= 1.0) return false;
  const double cap = w.cap();
  if (!((w.s.array() >= 0.0).all() && (w.s.array() <= cap).all())) return false;
  return std::abs(compensated_sum(w.s) - 1.0) <= 1e-12;
}

Eigen::VectorXd uniform_weights(Eigen::Index n) {
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

VectorSet::VectorSet(Eigen::MatrixXd rows) : z_(std::move(rows)) {
  if (z_.rows() == 0 || z_.cols() == 0) throw std::invalid_argument("VectorSet: empty");
  if (!z_.allFinite()) throw std::invalid_argument("VectorSet: non-finite entries");
  sq_norms_ = z_.rowwise().squaredNorm();
}

Eigen::VectorXd VectorSet::apply_second_moment(const Eigen::VectorXd& s,
                                               const Eigen::VectorXd& v) const {
  if (s.size() != z_.rows()) throw std::invalid_argument("weights length mismatch");
  if (v.size() != z_.cols()) throw std::invalid_argument("vector dimension mismatch");
  return z_.transpose() * (s.cwiseProduct(z_ * v));
}

Eigen::MatrixXd VectorSet::second_moment(const Eigen::VectorXd& s) const {
  if (s.size() != z_.rows()) throw std::invalid_argument("weights length mismatch");
  return z_.transpose() * s.asDiagonal() * z_;
}

SpectralCertificate lambda_max(const VectorSet& zs, const Eigen::VectorXd& s,
                               const PowerOptions& opts) {
  if (opts.tol <= 0.0 || opts.tol > 0.1) throw std::invalid_argument("lambda_max: tol outside (0, 0.1]");
  if (s.size() != zs.size()) throw std::invalid_argument("lambda_max: weights length mismatch");

  const Eigen::Index d = zs.dim();
  const Eigen::Index n = zs.size();

  // Normalize by the trace so stopping rules are scale-free:
  // trace = sum_i s_i ||Z_i||^2 and lambda_max in [trace/d, trace].
  const double trace = s.dot(zs.squared_norms());
  SpectralCertificate cert;
  if (trace <= 0.0) {
    Rng rng(opts.seed);
    auto st = rng.stream(0);
    Eigen::VectorXd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = st.normal();
    v.normalize();
    cert.v = v;
    return cert;  // zero operator: lambda = residual = 0
  }
  const Eigen::VectorXd sn = s / trace;

  int cap = opts.max_iterations;
  if (cap <= 0) {
    double ln = std::log(static_cast<double>(d) * static_cast<double>(n));
    cap = static_cast<int>(10.0 * std::ceil(ln / opts.tol));
  }

  Rng rng(opts.seed);
  auto st = rng.stream(0);
  Eigen::VectorXd v(d);
  if (opts.warm_start != nullptr && opts.warm_start->size() == d &&
      opts.warm_start->allFinite() && opts.warm_start->norm() > 0.0) {
    v = opts.warm_start->normalized();
  } else {
    for (Eigen::Index j = 0; j < d; ++j) v(j) = st.normal();
    v.normalize();
  }

  double lambda_prev = -1.0;
  int stable = 0;
  SpectralCertificate best;
  best.v = v;
  best.residual = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= cap; ++it) {
    Eigen::VectorXd u = zs.apply_second_moment(sn, v);
    double lambda = v.dot(u);  // Rayleigh quotient, ||v|| = 1
    double residual = (u - lambda * v).norm();

    if (lambda >= best.lambda) {
      best.lambda = lambda;
      best.v = v;
      best.residual = residual;
      best.iterations = it;
    }

    const bool settled =
        lambda_prev >= 0.0 &&
        std::abs(lambda - lambda_prev) <= (opts.tol / 10.0) * std::max(lambda, 1e-300);
    stable = settled ? stable + 1 : 0;
    // Dense spectra near the top make the residual criterion unreachable while
    // the Rayleigh value has long converged; when a one-sided estimate is
    // acceptable, a sustained plateau is enough to stop.
    const bool plateau = opts.allow_partial && it >= 8 && stable >= 6;
    if ((settled && residual <= opts.tol * lambda) || plateau) {
      cert.lambda = lambda * trace;
      cert.v = v;
      cert.residual = residual * trace;
      cert.iterations = it;
      return cert;
    }
    lambda_prev = lambda;

    double un = u.norm();
    if (un <= 1e-300) {
      // Start vector fell into the kernel; re-randomize and keep going.
      for (Eigen::Index j = 0; j < d; ++j) v(j) = st.normal();
      v.normalize();
      lambda_prev = -1.0;
      stable = 0;
      continue;
    }
    v = u / un;
  }

  best.lambda *= trace;
  best.residual *= trace;
  if (opts.allow_partial) return best;
  throw ConvergenceError("lambda_max: no convergence within iteration cap", best);
}

}  // namespace robreg

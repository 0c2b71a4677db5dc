#include "robreg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "robreg/packsdp.hpp"
#include "robreg/rng.hpp"

namespace robreg {

double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("tv_distance: length mismatch");
  }
  if (a.minCoeff() < 0.0 || b.minCoeff() < 0.0) {
    throw std::invalid_argument("tv_distance: negative probability");
  }
  if (std::abs(compensated_sum(a) - 1.0) > 1e-9 ||
      std::abs(compensated_sum(b) - 1.0) > 1e-9) {
    throw std::invalid_argument("tv_distance: probabilities must sum to 1");
  }
  return 0.5 * (a - b).cwiseAbs().sum();
}

Eigen::VectorXd Decomposition::reconstruct() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const auto m = static_cast<double>(atoms.empty() ? 1 : atoms.front().support.size());
  for (const auto& atom : atoms) {
    const double w = atom.gamma / m;
    for (Eigen::Index i : atom.support) out(i) += w;
  }
  return out;
}

Decomposition decompose(const SimplexWeights& weights) {
  const Eigen::Index n = weights.s.size();
  const double dn = weights.delta * static_cast<double>(n);
  if (std::abs(dn - std::round(dn)) > 1e-9) {
    throw std::invalid_argument("decompose: delta*n must be an integer");
  }
  if (!simplex_member(weights)) {
    throw std::invalid_argument("decompose: point outside the capped simplex");
  }
  const auto m = static_cast<Eigen::Index>(std::llround(dn)) >= n
                     ? Eigen::Index{0}
                     : n - static_cast<Eigen::Index>(std::llround(dn));
  if (m <= 0 || m >= n + 1) {
    throw std::invalid_argument("decompose: degenerate support size");
  }
  const double md = static_cast<double>(m);

  Eigen::VectorXd r = weights.s;
  double remaining = 1.0;
  Decomposition out;
  out.delta = weights.delta;
  out.n = n;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index pass = 0; pass < n + 2 && remaining > 1e-12; ++pass) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return r(a) > r(b);
    });
    std::vector<Eigen::Index> support(order.begin(), order.begin() + m);
    std::sort(support.begin(), support.end());

    double min_in = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : support) min_in = std::min(min_in, r(i));
    double max_out = 0.0;
    for (auto it = order.begin() + m; it != order.end(); ++it) {
      max_out = std::max(max_out, r(*it));
    }

    double gamma = std::min({md * min_in, remaining - md * max_out, remaining});
    gamma = std::max(gamma, 0.0);
    if (gamma <= 0.0) break;

    for (Eigen::Index i : support) r(i) = std::max(r(i) - gamma / md, 0.0);
    remaining -= gamma;
    out.atoms.push_back({std::move(support), gamma});
  }

  if (remaining > 1e-9) {
    throw std::runtime_error("decompose: failed to exhaust the mass");
  }
  return out;
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& x, double cap) {
  const Eigen::Index n = x.size();
  if (n <= 0 || cap <= 0.0) {
    throw std::invalid_argument("project_capped_simplex: bad arguments");
  }
  if (cap * static_cast<double>(n) < 1.0) {
    throw std::invalid_argument("project_capped_simplex: caps cannot carry unit mass");
  }
  // The mass g(shift) = sum_i clamp(x_i - shift, 0, cap) is piecewise linear
  // and nonincreasing, its slope changing only where a coordinate turns on
  // (shift = x_i) or saturates (shift = x_i - cap). Walking the sorted
  // breakpoints from the top finds the exact crossing of g = 1 in one pass.
  std::vector<std::pair<double, int>> bp;
  bp.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    bp.emplace_back(x(i), 1);
    bp.emplace_back(x(i) - cap, -1);
  }
  std::sort(bp.begin(), bp.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double theta = bp.front().first;
  double mass = 0.0;
  double slope = 0.0;
  double shift = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [b, kind] : bp) {
    const double seg = theta - b;
    if (slope > 0.0 && mass + slope * seg >= 1.0) {
      shift = theta - (1.0 - mass) / slope;
      break;
    }
    mass += slope * seg;
    theta = b;
    slope += kind;
  }
  // Falls through only when the caps sum to one exactly: everything saturates.
  if (std::isnan(shift)) shift = theta;
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::clamp(x(i) - shift, 0.0, cap);

  // Exact repair: spread the residual over coordinates with room.
  for (int round = 0; round < 64; ++round) {
    const double deficit = 1.0 - compensated_sum(s);
    if (std::abs(deficit) <= 1e-15) break;
    double room = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      room += deficit > 0.0 ? cap - s(i) : s(i);
    }
    if (room <= 0.0) break;
    const double scale = deficit / room;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double slack = deficit > 0.0 ? cap - s(i) : s(i);
      s(i) = std::clamp(s(i) + scale * slack, 0.0, cap);
    }
  }
  return s;
}

Eigen::VectorXd random_simplex_weights(Eigen::Index n, double delta,
                                       std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("random_simplex_weights: empty");
  const double cap = 1.0 / ((1.0 - delta) * static_cast<double>(n));
  auto stream = Rng(seed).stream(0x5157);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = -std::log(stream.uniform());
  x /= x.sum();
  return project_capped_simplex(x, cap);
}

double dense_lambda_max(const VectorSet& zs, const Eigen::VectorXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(zs.second_moment(s),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

namespace {

// Subgradient descent on s -> lambda_max(sum s_i z_i z_i^T) over the capped
// simplex, with the eigenproblem solved densely at fixed dimension.
template <int D>
class SmallEig {
 public:
  using Mat = Eigen::Matrix<double, D, D>;
  using Vec = Eigen::Matrix<double, D, 1>;

  static double top(const Mat& m, Vec* v) {
    Eigen::SelfAdjointEigenSolver<Mat> es;
    if constexpr (D == 2 || D == 3) {
      es.computeDirect(m, v ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    } else {
      es.compute(m, v ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    }
    if (v) *v = es.eigenvectors().col(D - 1);
    return es.eigenvalues()(D - 1);
  }
};

template <int D>
double subgradient_impl(const VectorSet& zs, double delta, const BruteOptions& opts) {
  using Mat = typename SmallEig<D>::Mat;
  using Vec = typename SmallEig<D>::Vec;
  const Eigen::Index n = zs.size();
  const double cap = 1.0 / ((1.0 - delta) * static_cast<double>(n));

  std::vector<Mat> outer(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec z = zs.rows().row(i).transpose();
    outer[static_cast<std::size_t>(i)] = z * z.transpose();
  }
  const auto evaluate = [&](const Eigen::VectorXd& s, Vec* v) {
    Mat m = Mat::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      m += s(i) * outer[static_cast<std::size_t>(i)];
    }
    return SmallEig<D>::top(m, v);
  };

  const int restarts = std::max(opts.restarts, 1);
  const int iters = std::max(opts.total_iterations / restarts, 1);
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd s;
    if (r == 0) {
      s = capped_min_weights(zs.squared_norms(), delta);
    } else if (r == 1) {
      s = uniform_weights(n);
    } else {
      s = random_simplex_weights(n, delta, opts.seed + static_cast<std::uint64_t>(r));
    }
    Vec v;
    best = std::min(best, evaluate(s, &v));
    for (int k = 0; k < iters; ++k) {
      Eigen::VectorXd g(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double proj = zs.rows().row(i).dot(v);
        g(i) = proj * proj;
      }
      const double gnorm = g.norm();
      if (gnorm <= 1e-14) break;
      const double alpha =
          std::sqrt(2.0) / (std::sqrt(static_cast<double>(k + 1)) * gnorm);
      s = project_capped_simplex(s - alpha * g, cap);
      best = std::min(best, evaluate(s, &v));
    }
  }
  return best;
}

template <int D>
std::optional<double> grid_impl(const VectorSet& zs, double delta, int resolution) {
  using Mat = typename SmallEig<D>::Mat;
  using Vec = typename SmallEig<D>::Vec;
  const Eigen::Index n = zs.size();
  const double cap = 1.0 / ((1.0 - delta) * static_cast<double>(n));
  const auto res = static_cast<long>(resolution);
  const long kmax = static_cast<long>(std::floor(cap * static_cast<double>(res) + 1e-9));

  std::vector<Mat> outer(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec z = zs.rows().row(i).transpose();
    outer[static_cast<std::size_t>(i)] =
        (z * z.transpose()) / static_cast<double>(res);
  }
  if (kmax * static_cast<long>(n) < res) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  // Depth-first enumeration of all k with sum k_i = res, 0 <= k_i <= kmax.
  const auto recurse = [&](const auto& self, Eigen::Index i, long left,
                           const Mat& acc) -> void {
    if (i == n - 1) {
      if (left > kmax) return;
      const Mat m = acc + static_cast<double>(left) * outer[static_cast<std::size_t>(i)];
      best = std::min(best, SmallEig<D>::top(m, nullptr));
      return;
    }
    const long coming = kmax * static_cast<long>(n - 1 - i);
    for (long k = std::max(0L, left - coming); k <= std::min(kmax, left); ++k) {
      self(self, i + 1,
           left - k, Mat(acc + static_cast<double>(k) * outer[static_cast<std::size_t>(i)]));
    }
  };
  recurse(recurse, 0, res, Mat::Zero());
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

template <typename F>
auto dispatch_dim(Eigen::Index d, F&& f) {
  switch (d) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    case 4: return f(std::integral_constant<int, 4>{});
    default:
      throw std::invalid_argument("brute-force oracle supports dimension <= 4 only");
  }
}

void check_brute_preconditions(const VectorSet& zs, double delta) {
  if (zs.size() > 10) {
    throw std::invalid_argument("brute-force oracle supports n <= 10 only");
  }
  if (delta <= 0.0 || delta > 1.0 / 3.0) {
    throw std::invalid_argument("brute-force oracle: delta outside (0, 1/3]");
  }
}

}  // namespace

double brute_mt_subgradient(const VectorSet& zs, double delta,
                            const BruteOptions& opts) {
  check_brute_preconditions(zs, delta);
  return dispatch_dim(zs.dim(), [&](auto dim) {
    return subgradient_impl<decltype(dim)::value>(zs, delta, opts);
  });
}

std::optional<double> brute_mt_grid(const VectorSet& zs, double delta,
                                    int resolution) {
  check_brute_preconditions(zs, delta);
  return dispatch_dim(zs.dim(), [&](auto dim) {
    return grid_impl<decltype(dim)::value>(zs, delta, resolution);
  });
}

double brute_mt(const VectorSet& zs, double delta, const BruteOptions& opts) {
  check_brute_preconditions(zs, delta);
  double best = brute_mt_subgradient(zs, delta, opts);
  if (zs.size() <= opts.grid_max_n) {
    if (const auto g = brute_mt_grid(zs, delta, opts.grid_resolution)) {
      best = std::min(best, *g);
    }
  }
  return best;
}

}  // namespace robreg

#include "robreg/packsdp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "robreg/rng.hpp"

namespace robreg {

namespace {

void check_delta(double delta, Eigen::Index n) {
  if (delta <= 0.0 || delta > 1.0 / 3.0) {
    throw std::invalid_argument("delta outside (0, 1/3]");
  }
  if ((1.0 - delta) * static_cast<double>(n) < 1.0) {
    throw std::invalid_argument("too few vectors for this delta");
  }
}

// Narrow point sets get exact certificates: building the d x d moment takes
// one pass over the data, cheaper than the dozens of matvecs power iteration
// needs on a dense spectrum, and the filter then works with the true top
// eigenpair instead of a one-sided estimate.
constexpr Eigen::Index kDenseCertificateDim = 32;

SpectralCertificate dense_certificate(const VectorSet& zs, const Eigen::VectorXd& s) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(zs.second_moment(s));
  SpectralCertificate cert;
  const Eigen::Index top = zs.dim() - 1;
  cert.lambda = std::max(eig.eigenvalues()(top), 0.0);
  cert.v = eig.eigenvectors().col(top);
  cert.residual = 0.0;
  cert.iterations = 1;
  return cert;
}

}  // namespace

Eigen::VectorXd capped_min_weights(const Eigen::VectorXd& scores, double delta) {
  const Eigen::Index n = scores.size();
  check_delta(delta, n);
  const double cap = 1.0 / ((1.0 - delta) * static_cast<double>(n));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores(a) < scores(b);
  });

  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  double used = 0.0;
  for (Eigen::Index i : order) {
    const double take = std::min(cap, 1.0 - used);
    if (take <= 0.0) break;
    s(i) = take;
    used += take;
  }
  return s;
}

double l_star(const VectorSet& zs, double delta) {
  const Eigen::VectorXd s = capped_min_weights(zs.squared_norms(), delta);
  return s.dot(zs.squared_norms());
}

PackResult solve_pack(const VectorSet& zs, double delta, double lambda,
                      const PackOptions& opts) {
  const Eigen::Index n = zs.size();
  check_delta(delta, n);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("solve_pack: lambda must be positive");
  }

  const double cap = 1.0 / ((1.0 - delta) * static_cast<double>(n));
  const double lambda_ok = lambda * (1.0 + opts.spectral_tol);
  const int max_rounds = opts.max_rounds > 0
                             ? opts.max_rounds
                             : static_cast<int>(std::ceil(40.0 / delta));
  const Rng rng(opts.seed);

  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, cap);
  Eigen::VectorXd warm;
  if (opts.warm_start != nullptr && opts.warm_start->size() == zs.dim()) {
    warm = *opts.warm_start;
  }
  std::vector<double> support_scores;
  support_scores.reserve(static_cast<std::size_t>(n));

  PackResult out;
  out.weights.delta = delta;

  // Best spectrally-feasible iterate so far, ranked by total mass.
  Eigen::VectorXd best_s;
  double best_mass = -1.0;
  double best_lambda = 0.0;
  Eigen::VectorXd best_dir;

  const bool exact = zs.dim() <= kDenseCertificateDim;
  const auto certify = [&](int tag, const Eigen::VectorXd& weights) {
    if (exact) {
      SpectralCertificate cert = dense_certificate(zs, weights);
      out.power_iterations += cert.iterations;
      return cert;
    }
    PowerOptions popts;
    popts.tol = opts.power_tol;
    popts.seed = rng.derive(static_cast<std::uint64_t>(tag));
    popts.max_iterations = opts.power_iteration_cap;
    popts.allow_partial = true;
    popts.warm_start = warm.size() > 0 ? &warm : nullptr;
    SpectralCertificate cert = lambda_max(zs, weights, popts);
    warm = cert.v;
    out.power_iterations += cert.iterations;
    return cert;
  };
  // An exact certificate needs no confidence margin on top.
  const auto upper = [&](double lam) {
    return exact ? lam : lam / (1.0 - opts.power_tol);
  };

  int restores = 0;
  int raises = 0;
  int best_round = 0;
  for (int round = 1; round <= max_rounds; ++round) {
    const SpectralCertificate cert = certify(round, s);
    const double lambda_ub = upper(cert.lambda);
    out.rounds = round;
    if (lambda_ub <= lambda_ok) {
      const double mass = compensated_sum(s);
      if (mass > best_mass) {
        if (mass > best_mass + 1e-7) best_round = round;
        best_mass = mass;
        best_s = s;
        best_lambda = cert.lambda;
        best_dir = cert.v;
      }
      // A caller with a floor only asks whether the floor is reachable. Once
      // it is cleared with margin, or cleared and no longer improving, more
      // polishing cannot change the verdict.
      if (opts.objective_floor > 0.0 && best_mass >= opts.objective_floor) {
        if (best_mass >= 0.5 * (1.0 + opts.objective_floor)) break;
        if (round - best_round > 8) break;
      }
      // Feasible with slack left: convert it back into mass by growing every
      // coordinate until a cap or the spectral bound binds. Clamping only
      // shrinks the moment relative to a uniform rescale, so the bound holds.
      // The growth stops a quarter tolerance short of the bound on purpose:
      // the exchange phase below needs that margin to move mass around.
      const double restore_target = lambda_ok / (1.0 + opts.spectral_tol / 4.0);
      const double grow = restore_target / std::max(lambda_ub, 1e-300);
      const bool room = (s.array() < cap * (1.0 - 1e-12)).any();
      if (room && grow > 1.0 + opts.spectral_tol / 16.0 && restores < 40) {
        ++restores;
        s = (grow * s).cwiseMin(cap);
        continue;
      }
      // The shave bends the living coordinates away from their caps; on
      // benign data the uniform profile over them, scaled onto the bound, is
      // often the better mass point. One certificate prices that candidate.
      {
        const double alive_floor = cap * 1e-6;
        Eigen::VectorXd cand = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          if (s(i) > alive_floor) cand(i) = cap;
        }
        const SpectralCertificate cc = certify(max_rounds + 100 + round, cand);
        const double cand_ub = upper(cc.lambda);
        if (cand_ub > 0.0) {
          cand *= std::min(1.0, (lambda_ok / (1.0 + opts.spectral_tol / 4.0)) / cand_ub);
          const double cand_mass = compensated_sum(cand);
          if (cand_mass > mass + 1e-9 && cand_mass > best_mass + 1e-9) {
            s = std::move(cand);
            continue;
          }
        }
      }
      // Uniform growth has stalled: the top direction is pinned against the
      // bound, so no coordinate can grow alone. Mass can still be created by
      // paired exchanges: shed from the coordinate loading the top direction
      // the most, feed the sub-cap coordinate loading it the least, at the
      // rate that keeps the pinned Rayleigh quotient constant. The rate
      // exceeds one, so total mass strictly grows. Along the linear exchange
      // path the top eigenvalue is convex and starts feasible, so a bisection
      // finds the largest feasible step.
      if (room && opts.objective_floor > 0.0 &&
          best_mass < opts.objective_floor && raises < 2) {
        const double target = exact ? lambda_ok : lambda_ok * (1.0 - opts.power_tol);
        Eigen::MatrixXd moment = zs.second_moment(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        bool progressed = false;
        // Each exchange moves at most one cap of mass, so this is a small-n
        // device; past a few dozen moves the shave/restore loop is the only
        // path that can still matter.
        const int budget = static_cast<int>(std::min<Eigen::Index>(4 * n, 64));
        for (int pass = 0; pass < budget; ++pass) {
          es.compute(moment);
          const Eigen::VectorXd v = es.eigenvectors().col(zs.dim() - 1);
          const Eigen::VectorXd q = (zs.rows() * v).array().square();
          Eigen::Index donor = -1;
          Eigen::Index recv = -1;
          for (Eigen::Index i = 0; i < n; ++i) {
            if (s(i) > 1e-15 && (donor < 0 || q(i) > q(donor))) donor = i;
            if (cap - s(i) > 1e-15 && (recv < 0 || q(i) < q(recv))) recv = i;
          }
          if (donor < 0 || recv < 0 || donor == recv) break;
          if (q(donor) <= q(recv) * (1.0 + 1e-9)) break;
          const double head = cap - s(recv);
          const double shed = q(recv) / q(donor);
          const double t_cap =
              std::min(1.0, shed > 0.0 ? s(donor) / (head * shed) : 1.0);
          const Eigen::VectorXd zr = zs.rows().row(recv).transpose();
          const Eigen::VectorXd zd = zs.rows().row(donor).transpose();
          const Eigen::MatrixXd step =
              head * (zr * zr.transpose()) - head * shed * (zd * zd.transpose());
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> probe_es;
          const auto top_at = [&](double t) {
            probe_es.compute(moment + t * step, Eigen::EigenvaluesOnly);
            return probe_es.eigenvalues().maxCoeff();
          };
          double lo = 0.0;
          double hi = t_cap;
          if (top_at(t_cap) <= target) {
            lo = t_cap;
          } else {
            for (int it = 0; it < 30; ++it) {
              const double mid = 0.5 * (lo + hi);
              (top_at(mid) <= target ? lo : hi) = mid;
            }
          }
          if (lo <= 0.0) break;
          const double new_recv = std::min(s(recv) + lo * head, cap);
          const double new_donor = std::max(s(donor) - lo * head * shed, 0.0);
          moment += (new_recv - s(recv)) * (zr * zr.transpose()) +
                    (new_donor - s(donor)) * (zd * zd.transpose());
          s(recv) = new_recv;
          s(donor) = new_donor;
          progressed = true;
          if (compensated_sum(s) >= opts.objective_floor + 1e-9) break;
        }
        if (progressed) {
          ++raises;
          continue;
        }
      }
      break;
    }

    // The shave/restore alternation settles into an equilibrium when the
    // feasible mass stops moving; once it has, further rounds just retrace it.
    if (best_mass >= 0.0 && round - best_round > 12) break;

    const double objective = compensated_sum(s);
    if (opts.objective_floor > 0.0 && best_mass < opts.objective_floor &&
        objective < 0.5 * opts.objective_floor) {
      // Mass has collapsed to where not even the restoration phase could lift
      // it back over the floor; report the shortfall without finishing.
      out.weights.s = s;
      out.objective = objective;
      out.lambda_estimate = cert.lambda;
      out.direction = cert.v;
      out.feasible = false;
      return out;
    }

    // Score every vector still carrying real mass against the top direction;
    // shave the mass of those above the median score, proportionally to the
    // score. Coordinates already ground down to a dust of a cap are left out:
    // their scores would otherwise distort the median long after their mass
    // stopped mattering. The shave strength tracks the relative
    // infeasibility: far over the bound it cuts at full force, nearer the
    // boundary it trims more gently so good mass survives. The factor never
    // drops below a quarter: annihilating a coordinate outright is
    // irreversible, and on small n the mass target needs every coordinate.
    const double excess = std::max(0.0, 1.0 - lambda_ok / lambda_ub);
    const double strength = std::clamp(4.0 * excess, 0.2, 1.0);
    const double alive_floor = cap * 1e-6;
    Eigen::VectorXd tau = (zs.rows() * cert.v).array().square();
    support_scores.clear();
    double tau_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (s(i) > alive_floor) {
        support_scores.push_back(tau(i));
        tau_max = std::max(tau_max, tau(i));
      }
    }
    if (support_scores.empty() || tau_max <= 0.0) {
      // Numerically dead: certificate says infeasible but no direction to cut.
      break;
    }
    const auto mid = support_scores.begin() +
                     static_cast<std::ptrdiff_t>(support_scores.size() / 2);
    std::nth_element(support_scores.begin(), mid, support_scores.end());
    const double median_score = *mid;

    // Cut rates are normalized by a reference score. Starting from the top
    // score stalls whenever that score belongs to a nearly massless
    // coordinate, so back the reference off geometrically until the planned
    // reduction of the Rayleigh quotient is worth a round. If even the most
    // aggressive level cannot close a quarter of the gap, the mass above the
    // median is spectrally diffuse and a uniform rescale to the boundary
    // does strictly better than grinding it down.
    const double boundary = lambda_ok / (1.0 + opts.spectral_tol / 4.0);
    const double target_cut = 0.25 * (lambda_ub - boundary);
    double tau_ref = tau_max;
    double planned_cut = 0.0;
    for (int level = 0; level < 8; ++level) {
      planned_cut = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (s(i) > alive_floor && tau(i) > median_score) {
          planned_cut +=
              s(i) * tau(i) * std::min(strength * tau(i) / tau_ref, 0.75);
        }
      }
      if (planned_cut >= target_cut || tau_ref <= 4.0 * median_score) break;
      tau_ref *= 0.25;
    }
    if (planned_cut < target_cut) {
      s *= boundary / lambda_ub;
      continue;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (s(i) > alive_floor && tau(i) > median_score) {
        s(i) *= std::max(1.0 - strength * tau(i) / tau_ref, 0.25);
      }
    }
  }

  if (best_mass >= 0.0) {
    out.weights.s = std::move(best_s);
    out.objective = best_mass;
    out.lambda_estimate = best_lambda;
    out.direction = std::move(best_dir);
    out.feasible = true;
    return out;
  }

  // Round budget exhausted without one feasible certificate: rescaling the
  // whole point always lands inside, since lambda_max is homogeneous in s.
  for (int attempt = 0; attempt < 5; ++attempt) {
    const SpectralCertificate cert = certify(max_rounds + 1 + attempt, s);
    const double lambda_ub = upper(cert.lambda);
    if (lambda_ub <= lambda_ok) {
      out.weights.s = s;
      out.objective = compensated_sum(s);
      out.lambda_estimate = cert.lambda;
      out.direction = cert.v;
      out.feasible = true;
      return out;
    }
    s *= lambda / lambda_ub;
  }

  out.weights.s = s;
  out.objective = compensated_sum(s);
  out.feasible = false;
  throw PackError("solve_pack: could not certify feasibility", out);
}

SimplexWeights pack_to_mt(const BoxWeights& weights, double delta, double lambda) {
  const Eigen::Index n = weights.s.size();
  check_delta(delta, n);
  if (!box_feasible(weights)) {
    throw std::invalid_argument("pack_to_mt: weights violate the box caps");
  }
  const double total = compensated_sum(weights.s);
  if (total < 1.0 - delta / 10.0 - 1e-12) {
    throw std::invalid_argument("pack_to_mt: total mass below 1 - delta/10");
  }
  (void)lambda;  // the lambda bound is certified by the caller's solve

  SimplexWeights out;
  out.delta = 2.0 * delta;
  out.s = weights.s / total;
  return out;
}

namespace {

MtSolution solve_mt_single(const VectorSet& zs, double delta,
                           const MtOptions& opts, std::uint64_t seed) {
  const Eigen::Index d = zs.dim();
  const Rng rng(seed);

  MtSolution out;
  const double l = l_star(zs, delta);
  if (l <= 0.0) {
    // Enough zero vectors to carry all the mass: the optimum is exactly 0.
    out.weights.delta = 2.0 * delta;
    out.weights.s = capped_min_weights(zs.squared_norms(), delta);
    out.achieved = 0.0;
    return out;
  }

  double lambda_low = l / static_cast<double>(d);
  double lambda_high = l;
  // The min-norm mass point certifies lambda_high: its second moment has
  // trace l, so lambda_max <= l and the objective is the full unit mass.
  BoxWeights best{capped_min_weights(zs.squared_norms(), delta), delta};

  const int rounds = static_cast<int>(
      std::ceil(std::log2(10.0 * static_cast<double>(d) / delta)));
  const double floor = 1.0 - delta / 10.0;

  PackOptions popts;
  popts.spectral_tol = opts.spectral_tol;
  popts.objective_floor = floor;

  Eigen::VectorXd probe_warm;
  for (int round = 1; round <= rounds; ++round) {
    if (lambda_high - lambda_low <= (delta / 10.0) * lambda_low) break;
    const double lambda_mid = 0.5 * (lambda_low + lambda_high);
    popts.seed = rng.derive(static_cast<std::uint64_t>(round));
    popts.warm_start = probe_warm.size() > 0 ? &probe_warm : nullptr;
    const PackResult probe = solve_pack(zs, delta, lambda_mid, popts);
    probe_warm = probe.direction;
    const bool keep_high = probe.feasible && probe.objective >= floor;
    if (keep_high) {
      lambda_high = lambda_mid;
      best = probe.weights;
    } else {
      lambda_low = lambda_mid;
    }
    if (opts.collect_trace) {
      out.trace.push_back({lambda_mid, probe.objective, probe.lambda_estimate,
                           keep_high, probe.rounds, probe.power_iterations});
    }
    out.rounds = round;
  }

  out.weights = pack_to_mt(best, delta, lambda_high);
  out.bracket_low = lambda_low;
  out.bracket_high = lambda_high;

  if (d <= kDenseCertificateDim) {
    out.achieved = dense_certificate(zs, out.weights.s).lambda;
  } else {
    PowerOptions final_opts;
    final_opts.tol = 1e-4;
    final_opts.seed = rng.derive(0xf17a);
    final_opts.max_iterations = 5000;
    final_opts.allow_partial = true;
    out.achieved = lambda_max(zs, out.weights.s, final_opts).lambda;
  }
  return out;
}

}  // namespace

MtSolution solve_mt(const VectorSet& zs, double delta, const MtOptions& opts) {
  const Eigen::Index n = zs.size();
  check_delta(delta, n);
  if ((1.0 - 2.0 * delta) * static_cast<double>(n) < 1.0) {
    throw std::invalid_argument("solve_mt: too few vectors for the 2*delta simplex");
  }
  const Rng rng(opts.seed);

  MtSolution best;
  bool have = false;
  const int restarts = std::max(opts.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    MtSolution candidate =
        solve_mt_single(zs, delta, opts, rng.derive(static_cast<std::uint64_t>(r)));
    if (!have || candidate.achieved < best.achieved) {
      best = std::move(candidate);
      have = true;
    }
  }
  return best;
}

}  // namespace robreg

#include "robreg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "robreg/rng.hpp"

namespace robreg {

Family family_from_name(const std::string& name) {
  if (name == "gaussian-identity") return Family::GaussianIdentity;
  if (name == "gaussian-spectrum") return Family::GaussianWithSpectrum;
  if (name == "student-t") return Family::StudentT;
  if (name == "bounded") return Family::BoundedHeavyTail;
  throw std::invalid_argument("unknown family: " + name);
}

std::string family_name(Family family) {
  switch (family) {
    case Family::GaussianIdentity: return "gaussian-identity";
    case Family::GaussianWithSpectrum: return "gaussian-spectrum";
    case Family::StudentT: return "student-t";
    case Family::BoundedHeavyTail: return "bounded";
  }
  throw std::logic_error("unreachable");
}

AdversaryKind adversary_from_name(const std::string& name) {
  if (name == "idle") return AdversaryKind::Idle;
  if (name == "mean-shift") return AdversaryKind::MeanShift;
  if (name == "leverage") return AdversaryKind::LeveragePoint;
  if (name == "flip") return AdversaryKind::ResponseFlip;
  if (name == "lb-swap") return AdversaryKind::LowerBoundSwap;
  throw std::invalid_argument("unknown adversary: " + name);
}

std::string adversary_name(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::Idle: return "idle";
    case AdversaryKind::MeanShift: return "mean-shift";
    case AdversaryKind::LeveragePoint: return "leverage";
    case AdversaryKind::ResponseFlip: return "flip";
    case AdversaryKind::LowerBoundSwap: return "lb-swap";
  }
  throw std::logic_error("unreachable");
}

double GenerativeSpec::kappa() const {
  if (!spectrum) return 1.0;
  return 1.0 / spectrum->minCoeff();
}

void GenerativeSpec::validate() const {
  if (w_star.size() < 1) {
    throw std::invalid_argument("generate: w_star must be nonempty");
  }
  if (!w_star.allFinite()) {
    throw std::invalid_argument("generate: w_star must be finite");
  }
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("generate: sigma must be nonnegative");
  }
  if (spectrum) {
    if (spectrum->size() != w_star.size()) {
      throw std::invalid_argument("generate: spectrum length mismatch");
    }
    if (spectrum->minCoeff() <= 0.0) {
      throw std::invalid_argument("generate: spectrum entries must be positive");
    }
    if (std::abs(spectrum->maxCoeff() - 1.0) > 1e-12) {
      throw std::invalid_argument("generate: largest spectrum entry must be 1");
    }
  }
  if (family == Family::StudentT && dof < 5) {
    throw std::invalid_argument("generate: student-t needs dof >= 5");
  }
}

namespace {

// Unit-variance three-point law: +-3 with probability 1/18 each, else 0.
// Bounded by 3, fourth moment 9.
double three_point(Rng::Stream& stream) {
  const double u = stream.uniform();
  if (u < 1.0 / 18.0) return 3.0;
  if (u < 2.0 / 18.0) return -3.0;
  return 0.0;
}

double unit_draw(Family family, int dof, Rng::Stream& stream) {
  switch (family) {
    case Family::GaussianIdentity:
    case Family::GaussianWithSpectrum:
      return stream.normal();
    case Family::StudentT: {
      const double nu = static_cast<double>(dof);
      return stream.student_t(dof) * std::sqrt((nu - 2.0) / nu);
    }
    case Family::BoundedHeavyTail:
      return three_point(stream);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Dataset generate(const GenerativeSpec& spec, Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("generate: n must be positive");
  const Eigen::Index d = spec.dim();
  const Eigen::VectorXd scale = spec.spectrum
                                    ? spec.spectrum->cwiseSqrt().eval()
                                    : Eigen::VectorXd::Ones(d).eval();

  const Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto stream = rng.stream(static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = scale(j) * unit_draw(spec.family, spec.dof, stream);
    }
    const double noise = spec.sigma * unit_draw(spec.family, spec.dof, stream);
    y(i) = x.row(i).dot(spec.w_star) + noise;
  }

  GroundTruth truth;
  truth.w_star = spec.w_star;
  truth.sigma = spec.sigma;
  truth.kappa = spec.kappa();
  truth.eta = 0.0;
  return Dataset(std::move(x), std::move(y), std::move(truth));
}

namespace {

std::vector<Eigen::Index> pick_targets(const Dataset& data, Eigen::Index m,
                                       bool inspecting, Rng::Stream& stream) {
  const Eigen::Index n = data.n();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (inspecting) {
    Eigen::VectorXd norms = data.covariates().rowwise().squaredNorm();
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return norms(a) > norms(b);
    });
  } else {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto j = i + static_cast<Eigen::Index>(stream.uniform_index(
                             static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::VectorXd random_unit(Eigen::Index d, Rng::Stream& stream) {
  Eigen::VectorXd u(d);
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < d; ++j) u(j) = stream.normal();
    norm = u.norm();
  } while (norm < 1e-12);
  return u / norm;
}

}  // namespace

CorruptionOutcome corrupt(const Dataset& data, const AdversarySpec& adv,
                          std::uint64_t seed) {
  if (!data.truth()) {
    throw std::invalid_argument("corrupt: dataset lacks ground truth");
  }
  if (adv.eta < 0.0 || adv.eta > 1.0 / 3.0) {
    throw std::invalid_argument("corrupt: eta outside [0, 1/3]");
  }
  if (adv.magnitude <= 0.0) {
    throw std::invalid_argument("corrupt: magnitude must be positive");
  }

  CorruptionOutcome out{data, {}};
  GroundTruth truth = *data.truth();
  truth.eta = adv.eta;
  truth.corrupted_indices.clear();

  const Eigen::Index n = data.n();
  const auto m = static_cast<Eigen::Index>(
      std::floor(adv.eta * static_cast<double>(n)));

  if (adv.kind == AdversaryKind::Idle || m == 0) {
    if (adv.kind != AdversaryKind::Idle && adv.eta > 0.0) {
      out.warnings.push_back("corruption budget floor(eta*n) is zero; nothing replaced");
    }
    out.data = Dataset(data.covariates(), data.responses(), std::move(truth));
    return out;
  }

  const Rng rng(seed);
  auto pick_stream = rng.stream(0x91c8);
  auto dir_stream = rng.stream(0xd198);
  const std::vector<Eigen::Index> targets =
      pick_targets(data, m, adv.inspecting, pick_stream);

  Eigen::MatrixXd x = data.covariates();
  Eigen::VectorXd y = data.responses();
  const Eigen::Index d = data.d();
  const Eigen::VectorXd& w_star = truth.w_star;

  switch (adv.kind) {
    case AdversaryKind::MeanShift: {
      const Eigen::VectorXd u = random_unit(d, dir_stream);
      for (Eigen::Index i : targets) {
        x.row(i) = u.transpose();
        y(i) = adv.magnitude;
      }
      break;
    }
    case AdversaryKind::LeveragePoint: {
      const Eigen::VectorXd u = random_unit(d, dir_stream);
      for (Eigen::Index i : targets) {
        x.row(i) = (adv.magnitude * u).transpose();
        y(i) = x.row(i).dot(w_star + u);
      }
      break;
    }
    case AdversaryKind::ResponseFlip: {
      for (Eigen::Index i : targets) y(i) = -y(i);
      break;
    }
    case AdversaryKind::LowerBoundSwap: {
      const double shift = truth.sigma / std::sqrt(adv.eta);
      for (Eigen::Index i : targets) {
        x.row(i).setZero();
        x(i, 0) = 1.0;
        y(i) = w_star(0) + shift;
      }
      break;
    }
    case AdversaryKind::Idle:
      break;
  }

  truth.corrupted_indices = targets;
  out.data = Dataset(std::move(x), std::move(y), std::move(truth));
  return out;
}

double atoms_mean(const std::vector<DiscreteAtom>& atoms) {
  double m = 0.0;
  for (const auto& a : atoms) m += a.prob * a.value;
  return m;
}

double atoms_variance(const std::vector<DiscreteAtom>& atoms) {
  const double m = atoms_mean(atoms);
  double v = 0.0;
  for (const auto& a : atoms) v += a.prob * (a.value - m) * (a.value - m);
  return v;
}

double atoms_tv(const std::vector<DiscreteAtom>& a,
                const std::vector<DiscreteAtom>& b) {
  std::vector<std::pair<double, double>> merged;  // value -> p_a - p_b
  const auto add = [&](double value, double signed_prob) {
    for (auto& entry : merged) {
      if (entry.first == value) {
        entry.second += signed_prob;
        return;
      }
    }
    merged.emplace_back(value, signed_prob);
  };
  for (const auto& atom : a) add(atom.value, atom.prob);
  for (const auto& atom : b) add(atom.value, -atom.prob);
  double tv = 0.0;
  for (const auto& entry : merged) tv += std::abs(entry.second);
  return 0.5 * tv;
}

namespace {

void check_lb_args(double sigma, double eta) {
  if (sigma <= 0.0) throw std::invalid_argument("lower bound: sigma must be positive");
  if (eta <= 0.0 || eta >= 1.0 / 3.0) {
    throw std::invalid_argument("lower bound: eta outside (0, 1/3)");
  }
}

// Shared shape of both pairs: D1 is noiseless with w* = 0, D2 mixes a rare
// high atom with a compensating low atom so the noise stays mean zero while
// the response law differs from D1 on only eta/2 of the mass.
LowerBoundPair two_atom_pair(double sigma, double eta, double high) {
  const double p = eta / 2.0;
  const double w2 = p * high / (1.0 - p);
  const double low = -w2;

  LowerBoundPair pair;
  pair.d1.noise_atoms = {{0.0, 1.0}};
  pair.d1.response_atoms = {{0.0, 1.0}};
  pair.d1.x_fixed = Eigen::VectorXd::Ones(1);
  pair.d1.w_star = Eigen::VectorXd::Zero(1);
  pair.d1.sigma = sigma;
  pair.d1.eta = eta;

  pair.d2.noise_atoms = {{high, p}, {low, 1.0 - p}};
  // Y = w2 + noise: the low atom cancels w2 exactly, landing on 0.
  pair.d2.response_atoms = {{w2 + high, p}, {w2 + low, 1.0 - p}};
  pair.d2.x_fixed = Eigen::VectorXd::Ones(1);
  pair.d2.w_star = Eigen::VectorXd::Constant(1, w2);
  pair.d2.sigma = sigma;
  pair.d2.eta = eta;

  // The response laws differ exactly on the high atom's mass (the low atom of
  // D2 lands on D1's single support point), so the TV is p itself; atoms_tv
  // reproduces it up to summation ulps.
  pair.tv = p;
  pair.parameter_gap = w2;
  return pair;
}

}  // namespace

LowerBoundPair lower_bound_pair_ht(double sigma, double eta) {
  check_lb_args(sigma, eta);
  return two_atom_pair(sigma, eta, sigma / std::sqrt(eta));
}

LowerBoundPair lower_bound_pair_sg(double sigma, double eta) {
  check_lb_args(sigma, eta);
  return two_atom_pair(sigma, eta, sigma * std::sqrt(std::log(1.0 / eta)));
}

LowerBoundPair lower_bound_pair_cond(double sigma, double eta, double kappa,
                                     Eigen::Index d) {
  check_lb_args(sigma, eta);
  if (kappa < 1.0) throw std::invalid_argument("lower bound: kappa must be >= 1");
  if (d < 1) throw std::invalid_argument("lower bound: d must be positive");

  LowerBoundPair pair = lower_bound_pair_ht(sigma, eta);
  const double root_kappa = std::sqrt(kappa);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
  x(d - 1) = 1.0 / root_kappa;

  pair.d1.x_fixed = x;
  pair.d1.w_star = Eigen::VectorXd::Zero(d);
  pair.d2.x_fixed = x;
  // <x, w*> = w2 exactly as in the base pair, but the parameter distance
  // stretches by sqrt(kappa) along the weak direction.
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(d);
  w2(d - 1) = pair.parameter_gap * root_kappa;
  pair.d2.w_star = w2;
  pair.parameter_gap *= root_kappa;
  return pair;
}

}  // namespace robreg

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robreg/dataset.hpp"

namespace robreg {

enum class Family {
  GaussianIdentity,
  GaussianWithSpectrum,
  StudentT,
  BoundedHeavyTail,
};

Family family_from_name(const std::string& name);
std::string family_name(Family family);

struct GenerativeSpec {
  Family family = Family::GaussianIdentity;
  Eigen::VectorXd w_star;
  double sigma = 1.0;
  // Covariance diagonal; defaults to all ones. Largest entry must be 1 so the
  // condition number is read off the smallest entry.
  std::optional<Eigen::VectorXd> spectrum;
  int dof = 5;  // Student-t families only

  Eigen::Index dim() const { return w_star.size(); }
  double kappa() const;
  void validate() const;
};

/// Draws n i.i.d. samples y = <x, w*> + noise. Noise is matched to the
/// covariate family (see module docs); every family has mean zero covariates,
/// covariance diag(spectrum), and noise variance sigma^2.
Dataset generate(const GenerativeSpec& spec, Eigen::Index n, std::uint64_t seed);

enum class AdversaryKind {
  Idle,
  MeanShift,
  LeveragePoint,
  ResponseFlip,
  LowerBoundSwap,
};

AdversaryKind adversary_from_name(const std::string& name);
std::string adversary_name(AdversaryKind kind);

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::Idle;
  double eta = 0.0;
  double magnitude = 100.0;
  // Inspecting adversaries target the largest-norm covariates; oblivious ones
  // pick uniformly random indices.
  bool inspecting = false;
};

struct CorruptionOutcome {
  Dataset data;
  std::vector<std::string> warnings;
};

/// Replaces exactly floor(eta*n) samples. The returned ground truth records
/// the corrupted indices and the nominal eta.
CorruptionOutcome corrupt(const Dataset& data, const AdversarySpec& adv,
                          std::uint64_t seed);

struct DiscreteAtom {
  double value = 0.0;
  double prob = 0.0;
};

/// One-dimensional regression instance with a fixed covariate vector and a
/// finitely supported noise law, so response laws and TV distances are exact.
struct DistributionDesc {
  std::vector<DiscreteAtom> noise_atoms;
  std::vector<DiscreteAtom> response_atoms;
  Eigen::VectorXd x_fixed;
  Eigen::VectorXd w_star;
  double sigma = 1.0;
  double eta = 0.0;
};

struct LowerBoundPair {
  DistributionDesc d1;
  DistributionDesc d2;
  double tv = 0.0;         // exact TV between the response laws
  double parameter_gap = 0.0;  // ||w1* - w2*||
};

double atoms_mean(const std::vector<DiscreteAtom>& atoms);
double atoms_variance(const std::vector<DiscreteAtom>& atoms);
double atoms_tv(const std::vector<DiscreteAtom>& a, const std::vector<DiscreteAtom>& b);

/// Indistinguishable pair witnessing the sqrt(eta)*sigma floor for
/// heavy-tailed (variance-bounded) noise.
LowerBoundPair lower_bound_pair_ht(double sigma, double eta);

/// Pair witnessing the sigma*eta*sqrt(log 1/eta) floor for sub-Gaussian noise.
LowerBoundPair lower_bound_pair_sg(double sigma, double eta);

/// Conditioning-sensitive variant: the gap scales with sqrt(kappa).
LowerBoundPair lower_bound_pair_cond(double sigma, double eta, double kappa,
                                     Eigen::Index d);

}  // namespace robreg

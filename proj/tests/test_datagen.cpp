#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "robreg/datagen.hpp"
#include "robreg/regress.hpp"
#include "robreg/rng.hpp"

using robreg::AdversaryKind;
using robreg::AdversarySpec;
using robreg::Dataset;
using robreg::Family;
using robreg::GenerativeSpec;

TEST_SUITE("datagen") {

TEST_CASE("noiseless responses satisfy the model exactly") {
  GenerativeSpec spec;
  spec.w_star = Eigen::Vector2d(1.0, -2.0);
  spec.sigma = 0.0;
  const Dataset data = robreg::generate(spec, 3, 11);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const auto s = data.sample(i);
    CHECK(s.y == doctest::Approx(s.x.dot(spec.w_star)).epsilon(1e-14));
  }
  REQUIRE(data.truth().has_value());
  CHECK(data.truth()->w_star == spec.w_star);
  CHECK(data.truth()->corrupted_indices.empty());
}

TEST_CASE("generation is deterministic in the seed") {
  GenerativeSpec spec;
  spec.family = Family::StudentT;
  spec.w_star = Eigen::Vector3d(1, 2, 3);
  const Dataset a = robreg::generate(spec, 50, 7);
  const Dataset b = robreg::generate(spec, 50, 7);
  const Dataset c = robreg::generate(spec, 50, 8);
  CHECK(a.covariates() == b.covariates());
  CHECK(a.responses() == b.responses());
  CHECK(a.covariates() != c.covariates());
}

TEST_CASE("gaussian identity second moment is close to the identity") {
  GenerativeSpec spec;
  spec.w_star = Eigen::VectorXd::Zero(10);
  const Dataset data = robreg::generate(spec, 50000, 3);
  const Eigen::MatrixXd cov =
      data.covariates().transpose() * data.covariates() / 50000.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      cov - Eigen::MatrixXd::Identity(10, 10));
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("spectrum shapes the covariance and kappa reads off its bottom") {
  GenerativeSpec spec;
  spec.family = Family::GaussianWithSpectrum;
  spec.w_star = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd spectrum(3);
  spectrum << 1.0, 0.5, 0.25;
  spec.spectrum = spectrum;
  CHECK(spec.kappa() == doctest::Approx(4.0));

  const Dataset data = robreg::generate(spec, 60000, 5);
  const Eigen::MatrixXd cov =
      data.covariates().transpose() * data.covariates() / 60000.0;
  for (int j = 0; j < 3; ++j) {
    CHECK(cov(j, j) == doctest::Approx(spectrum(j)).epsilon(0.06));
  }
}

TEST_CASE("spec validation rejects bad spectra and low dof") {
  GenerativeSpec spec;
  spec.w_star = Eigen::Vector2d(1, 1);
  spec.spectrum = Eigen::Vector2d(0.5, 0.25);  // max must be 1
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  GenerativeSpec tspec;
  tspec.family = Family::StudentT;
  tspec.w_star = Eigen::Vector2d(1, 1);
  tspec.dof = 4;
  CHECK_THROWS_AS(tspec.validate(), std::invalid_argument);
}

TEST_CASE("student t covariates are hypercontractive with unit spectrum") {
  GenerativeSpec spec;
  spec.family = Family::StudentT;
  spec.w_star = Eigen::VectorXd::Zero(5);
  const Dataset data = robreg::generate(spec, 50000, 13);
  const Eigen::MatrixXd& x = data.covariates();

  const Eigen::MatrixXd cov = x.transpose() * x / 50000.0;
  CHECK((cov - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 0.1);

  auto st = robreg::Rng(77).stream(0);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd u(5);
    for (int j = 0; j < 5; ++j) u(j) = st.normal();
    u.normalize();
    const Eigen::VectorXd proj = x * u;
    const double m2 = proj.array().square().mean();
    const double m4 = proj.array().square().square().mean();
    CHECK(m4 / (m2 * m2) <= 25.0);
  }
}

TEST_CASE("corruption replaces exactly the floor of eta n samples") {
  GenerativeSpec spec;
  spec.w_star = Eigen::Vector2d(1, 0);
  const Dataset clean = robreg::generate(spec, 200, 21);

  AdversarySpec adv;
  adv.kind = AdversaryKind::MeanShift;
  adv.eta = 0.05;
  const auto out = robreg::corrupt(clean, adv, 5);
  REQUIRE(out.data.truth().has_value());
  const auto& idx = out.data.truth()->corrupted_indices;
  CHECK(idx.size() == 10);
  CHECK(std::is_sorted(idx.begin(), idx.end()));

  // Untouched rows are bitwise identical.
  const std::set<Eigen::Index> corrupted(idx.begin(), idx.end());
  for (Eigen::Index i = 0; i < clean.n(); ++i) {
    if (corrupted.count(i)) continue;
    CHECK(out.data.covariates().row(i) == clean.covariates().row(i));
    CHECK(out.data.responses()(i) == clean.responses()(i));
  }
}

TEST_CASE("idle adversary is the identity") {
  GenerativeSpec spec;
  spec.w_star = Eigen::Vector2d(1, 0);
  const Dataset clean = robreg::generate(spec, 40, 2);
  AdversarySpec adv;
  adv.eta = 0.1;  // budget present but the kind is Idle
  const auto out = robreg::corrupt(clean, adv, 3);
  CHECK(out.data.covariates() == clean.covariates());
  CHECK(out.data.responses() == clean.responses());
  CHECK(out.data.truth()->corrupted_indices.empty());
  CHECK(out.warnings.empty());
}

TEST_CASE("zero budget with an active adversary warns and changes nothing") {
  GenerativeSpec spec;
  spec.w_star = Eigen::Vector2d(1, 0);
  const Dataset clean = robreg::generate(spec, 15, 2);
  AdversarySpec adv;
  adv.kind = AdversaryKind::ResponseFlip;
  adv.eta = 0.05;  // floor(0.75) = 0
  const auto out = robreg::corrupt(clean, adv, 3);
  CHECK(out.data.responses() == clean.responses());
  REQUIRE(out.warnings.size() == 1);
  CHECK(out.warnings[0].find("zero") != std::string::npos);
}

TEST_CASE("leverage points wreck least squares") {
  GenerativeSpec spec;
  spec.w_star = Eigen::VectorXd::Ones(5);
  const Dataset clean = robreg::generate(spec, 2000, 31);

  AdversarySpec adv;
  adv.kind = AdversaryKind::LeveragePoint;
  adv.eta = 0.1;
  adv.magnitude = 100.0;
  const auto out = robreg::corrupt(clean, adv, 31);

  const double clean_err = (robreg::fit_ols(clean) - spec.w_star).norm();
  const double bad_err = (robreg::fit_ols(out.data) - spec.w_star).norm();
  CHECK(bad_err > 5.0 * clean_err);
}

TEST_CASE("name round trips") {
  for (const auto f : {Family::GaussianIdentity, Family::GaussianWithSpectrum,
                       Family::StudentT, Family::BoundedHeavyTail}) {
    CHECK(robreg::family_from_name(robreg::family_name(f)) == f);
  }
  for (const auto k :
       {AdversaryKind::Idle, AdversaryKind::MeanShift,
        AdversaryKind::LeveragePoint, AdversaryKind::ResponseFlip,
        AdversaryKind::LowerBoundSwap}) {
    CHECK(robreg::adversary_from_name(robreg::adversary_name(k)) == k);
  }
  CHECK_THROWS_AS(robreg::family_from_name("cauchy"), std::invalid_argument);
}

TEST_CASE("atom helpers on a hand distribution") {
  std::vector<robreg::DiscreteAtom> a{{0.0, 0.5}, {2.0, 0.5}};
  std::vector<robreg::DiscreteAtom> b{{0.0, 0.25}, {2.0, 0.75}};
  CHECK(robreg::atoms_mean(a) == doctest::Approx(1.0));
  CHECK(robreg::atoms_variance(a) == doctest::Approx(1.0));
  CHECK(robreg::atoms_tv(a, b) == doctest::Approx(0.25));
  CHECK(robreg::atoms_tv(a, a) == 0.0);
}

TEST_CASE("heavy tailed lower bound pair matches the construction") {
  const auto pair = robreg::lower_bound_pair_ht(1.0, 0.04);

  // D2 noise: sigma/sqrt(eta) = 5 with probability eta/2 = 0.02.
  bool found_high = false;
  for (const auto& atom : pair.d2.noise_atoms) {
    if (atom.value == doctest::Approx(5.0)) {
      found_high = true;
      CHECK(atom.prob == doctest::Approx(0.02));
    }
  }
  CHECK(found_high);
  CHECK(pair.d2.w_star(0) == doctest::Approx(0.2 / 1.96));
  CHECK(pair.parameter_gap == doctest::Approx(0.2 / 1.96));

  CHECK(robreg::atoms_mean(pair.d2.noise_atoms) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(robreg::atoms_variance(pair.d2.noise_atoms) <= 1.0 + 1e-9);
  CHECK(pair.tv <= 0.02 + 1e-15);
}

TEST_CASE("sub gaussian lower bound pair matches the construction") {
  const auto pair = robreg::lower_bound_pair_sg(1.0, 0.05);
  const double high = std::sqrt(std::log(20.0));

  bool found_high = false;
  for (const auto& atom : pair.d2.noise_atoms) {
    if (atom.value == doctest::Approx(high)) {
      found_high = true;
      CHECK(atom.prob == doctest::Approx(0.025));
    }
  }
  CHECK(found_high);
  CHECK(pair.parameter_gap == doctest::Approx(0.05 * high / 1.95));
  CHECK(robreg::atoms_mean(pair.d2.noise_atoms) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pair.tv <= 0.025 + 1e-15);
}

TEST_CASE("conditioned lower bound pair scales the gap by sqrt kappa") {
  const auto base = robreg::lower_bound_pair_ht(1.0, 0.04);
  const auto pair = robreg::lower_bound_pair_cond(1.0, 0.04, 4.0, 2);
  const Eigen::Index d = pair.d2.w_star.size();
  CHECK(pair.d2.w_star(d - 1) == doctest::Approx(2.0 * base.d2.w_star(0)));
  CHECK(pair.d2.x_fixed(d - 1) == doctest::Approx(0.5));
  CHECK(pair.d2.x_fixed(0) == doctest::Approx(1.0));
  CHECK(pair.parameter_gap == doctest::Approx(2.0 * base.parameter_gap));
  CHECK_THROWS_AS(robreg::lower_bound_pair_cond(1.0, 0.04, 4.0, 1),
                  std::invalid_argument);
}

}  // TEST_SUITE

#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <set>
#include <vector>

#include "robreg/datagen.hpp"
#include "robreg/preprocess.hpp"

using robreg::Dataset;
using robreg::GroundTruth;

namespace {

Dataset with_norms(const std::vector<double>& norms, Eigen::Index d) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(norms.size()), d);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = norms[i];
  }
  return Dataset(x, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(norms.size())));
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("truncation drops exactly the rows over the threshold") {
  // d = 4 and c1 = 10 gives threshold 20.
  const Dataset data = with_norms({3.0, 21.0, 5.0, 19.9}, 4);
  const auto result = robreg::truncate(data, {10.0});
  CHECK(result.kept.n() == 3);
  REQUIRE(result.removed.size() == 1);
  CHECK(result.removed[0] == 1);
  CHECK(result.kept.covariates()(0, 0) == 3.0);
  CHECK(result.kept.covariates()(1, 0) == 5.0);
  CHECK(result.kept.covariates()(2, 0) == 19.9);
}

TEST_CASE("truncation is the identity when nothing exceeds the threshold") {
  const Dataset data = with_norms({1.0, 2.0, 3.0}, 4);
  const auto result = robreg::truncate(data, {10.0});
  CHECK(result.removed.empty());
  CHECK(result.kept.covariates() == data.covariates());

  const auto again = robreg::truncate(result.kept, {10.0});
  CHECK(again.removed.empty());
  CHECK(again.kept.covariates() == result.kept.covariates());
}

TEST_CASE("degenerate truncation raises") {
  const Dataset data = with_norms({50.0, 60.0}, 4);
  CHECK_THROWS(robreg::truncate(data, {10.0}));
}

TEST_CASE("truncation remaps corrupted indices onto survivors") {
  Dataset data = with_norms({3.0, 21.0, 5.0, 19.9, 30.0, 7.0}, 4);
  GroundTruth truth;
  truth.w_star = Eigen::VectorXd::Zero(4);
  truth.eta = 1.0 / 3.0;
  truth.corrupted_indices = {1, 2, 5};  // index 1 gets removed
  data = data.with_truth(truth);

  const auto result = robreg::truncate(data, {10.0});
  // Survivors are original rows 0, 2, 3, 5; corrupted 2 -> 1, 5 -> 3.
  REQUIRE(result.kept.truth().has_value());
  const auto& remapped = result.kept.truth()->corrupted_indices;
  CHECK(remapped == std::vector<Eigen::Index>{1, 3});
}

TEST_CASE("gaussian identity rarely exceeds the default threshold") {
  robreg::GenerativeSpec spec;
  spec.w_star = Eigen::VectorXd::Zero(10);
  const Dataset data = robreg::generate(spec, 100000, 41);
  const auto result = robreg::truncate(data, {10.0});
  CHECK(static_cast<double>(result.removed.size()) <= 0.01 * 100000);

  const Eigen::MatrixXd full =
      data.covariates().transpose() * data.covariates() / 100000.0;
  const Eigen::MatrixXd kept = result.kept.covariates().transpose() *
                               result.kept.covariates() /
                               static_cast<double>(result.kept.n());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(full - kept);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("split partitions the indices") {
  const Dataset data = with_norms({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 2);
  const auto parts = robreg::split(data, 4, 17);
  CHECK(parts.part1.n() == 4);
  CHECK(parts.part2.n() == 6);
  CHECK(std::is_sorted(parts.indices1.begin(), parts.indices1.end()));
  CHECK(std::is_sorted(parts.indices2.begin(), parts.indices2.end()));

  std::set<Eigen::Index> all(parts.indices1.begin(), parts.indices1.end());
  all.insert(parts.indices2.begin(), parts.indices2.end());
  CHECK(all.size() == 10);

  // Rows carry their original content in original order.
  for (std::size_t k = 0; k < parts.indices1.size(); ++k) {
    CHECK(parts.part1.covariates()(static_cast<Eigen::Index>(k), 0) ==
          static_cast<double>(parts.indices1[k]));
  }
}

TEST_CASE("split is deterministic and seed sensitive") {
  const Dataset data = with_norms(std::vector<double>(30, 1.0), 2);
  const auto a = robreg::split(data, 10, 5);
  const auto b = robreg::split(data, 10, 5);
  const auto c = robreg::split(data, 10, 6);
  CHECK(a.indices1 == b.indices1);
  CHECK(a.indices1 != c.indices1);
  CHECK_THROWS_AS(robreg::split(data, 30, 5), std::invalid_argument);
  CHECK_THROWS_AS(robreg::split(data, 0, 5), std::invalid_argument);
}

TEST_CASE("split membership is close to uniform over seeds") {
  const Dataset data = with_norms(std::vector<double>(100, 1.0), 2);
  std::vector<int> hits(100, 0);
  for (int seed = 0; seed < 1000; ++seed) {
    const auto parts = robreg::split(data, 50, static_cast<std::uint64_t>(seed));
    for (const auto i : parts.indices1) ++hits[static_cast<std::size_t>(i)];
  }
  for (int h : hits) {
    CHECK(h > 440);
    CHECK(h < 560);
  }
}

}  // TEST_SUITE

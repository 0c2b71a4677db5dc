#include "robreg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "robreg/rng.hpp"

namespace robreg {

namespace {

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& keep) {
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd x(m, data.d());
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    x.row(r) = data.covariates().row(keep[static_cast<std::size_t>(r)]);
    y(r) = data.responses()(keep[static_cast<std::size_t>(r)]);
  }
  std::optional<GroundTruth> truth;
  if (data.truth()) {
    GroundTruth t = *data.truth();
    std::vector<Eigen::Index> remapped;
    for (Eigen::Index orig : t.corrupted_indices) {
      const auto it = std::lower_bound(keep.begin(), keep.end(), orig);
      if (it != keep.end() && *it == orig) {
        remapped.push_back(static_cast<Eigen::Index>(it - keep.begin()));
      }
    }
    t.corrupted_indices = std::move(remapped);
    truth = std::move(t);
  }
  return Dataset(std::move(x), std::move(y), std::move(truth));
}

}  // namespace

TruncationResult truncate(const Dataset& data, const TruncationConfig& cfg) {
  if (cfg.c1 < 1.0) {
    throw std::invalid_argument("truncate: c1 must be at least 1");
  }
  const double threshold =
      cfg.c1 * std::sqrt(static_cast<double>(data.d()));
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> removed;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.covariates().row(i).norm() <= threshold) {
      keep.push_back(i);
    } else {
      removed.push_back(i);
    }
  }
  if (keep.empty()) {
    throw std::runtime_error("truncate: degenerate truncation, nothing survives");
  }
  return {subset(data, keep), std::move(removed)};
}

SplitResult split(const Dataset& data, Eigen::Index n1, std::uint64_t seed) {
  const Eigen::Index n = data.n();
  if (n1 < 1 || n1 >= n) {
    throw std::invalid_argument("split: n1 must lie in [1, n-1]");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  auto stream = Rng(seed).stream(0x5b17);
  for (Eigen::Index i = 0; i < n1; ++i) {
    const auto j =
        i + static_cast<Eigen::Index>(stream.uniform_index(
                static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<Eigen::Index> idx1(perm.begin(), perm.begin() + n1);
  std::vector<Eigen::Index> idx2(perm.begin() + n1, perm.end());
  std::sort(idx1.begin(), idx1.end());
  std::sort(idx2.begin(), idx2.end());
  SplitResult out{subset(data, idx1), subset(data, idx2), std::move(idx1),
                  std::move(idx2)};
  return out;
}

}  // namespace robreg

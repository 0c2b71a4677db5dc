#pragma once

#include <cstdint>
#include <vector>

#include "robreg/dataset.hpp"

namespace robreg {

struct TruncationConfig {
  double c1 = 10.0;  // threshold is c1 * sqrt(d)
};

struct TruncationResult {
  Dataset kept;
  std::vector<Eigen::Index> removed;  // original indices, ascending
};

/// Drops every sample with ||x|| > c1*sqrt(d). Ground-truth corruption indices
/// are remapped onto the surviving positions.
TruncationResult truncate(const Dataset& data, const TruncationConfig& cfg);

struct SplitResult {
  Dataset part1;
  Dataset part2;
  std::vector<Eigen::Index> indices1;  // original indices, ascending
  std::vector<Eigen::Index> indices2;
};

/// Uniformly random disjoint partition into sizes n1 and n-n1; original order
/// preserved within each part; deterministic given seed.
SplitResult split(const Dataset& data, Eigen::Index n1, std::uint64_t seed);

}  // namespace robreg

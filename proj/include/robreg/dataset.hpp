#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

namespace robreg {

/// Simulation metadata: the planted parameter and corruption bookkeeping.
/// Never serialized into the CSV itself; travels in a sibling JSON file.
struct GroundTruth {
  Eigen::VectorXd w_star;
  double sigma = 1.0;
  double eta = 0.0;
  double kappa = 1.0;
  std::vector<Eigen::Index> corrupted_indices;  // sorted ascending
};

struct Sample {
  Eigen::VectorXd x;
  double y = 0.0;
};

/// Immutable set of labeled pairs (X_i, Y_i). Rows of covariates() are the
/// X_i in insertion order; nothing in the library ever reorders them.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd responses,
          std::optional<GroundTruth> truth = std::nullopt);

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index d() const { return x_.cols(); }

  const Eigen::MatrixXd& covariates() const { return x_; }
  const Eigen::VectorXd& responses() const { return y_; }
  Sample sample(Eigen::Index i) const { return Sample{x_.row(i).transpose(), y_(i)}; }

  const std::optional<GroundTruth>& truth() const { return truth_; }
  Dataset with_truth(GroundTruth t) const { return Dataset(x_, y_, std::move(t)); }

 private:
  Eigen::MatrixXd x_;  // n x d
  Eigen::VectorXd y_;  // n
  std::optional<GroundTruth> truth_;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

GroundTruth load_truth(const std::filesystem::path& path);
void save_truth(const GroundTruth& truth, const std::filesystem::path& path);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace robreg

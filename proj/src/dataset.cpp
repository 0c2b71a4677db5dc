#include "robreg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace robreg {

namespace {

double parse_field(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": bad numeric field '" + field + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd responses,
                 std::optional<GroundTruth> truth)
    : x_(std::move(covariates)), y_(std::move(responses)), truth_(std::move(truth)) {
  if (x_.rows() == 0 || x_.cols() == 0) throw std::invalid_argument("dataset: no samples");
  if (x_.rows() != y_.size()) throw std::invalid_argument("dataset: covariate/response count mismatch");
  if (!x_.allFinite() || !y_.allFinite()) throw std::invalid_argument("dataset: non-finite entries");
  if (truth_) {
    if (truth_->w_star.size() != x_.cols()) throw std::invalid_argument("truth: w_star dimension mismatch");
    if (truth_->sigma < 0.0) throw std::invalid_argument("truth: sigma must be nonnegative");
    if (truth_->kappa < 1.0) throw std::invalid_argument("truth: kappa must be >= 1");
    if (truth_->eta < 0.0 || truth_->eta > 1.0 / 3.0) throw std::invalid_argument("truth: eta outside [0, 1/3]");
    for (auto idx : truth_->corrupted_indices) {
      if (idx < 0 || idx >= x_.rows()) throw std::invalid_argument("truth: corrupted index out of range");
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") {
    throw ParseError(path.string() + ": header must be x1,...,xd,y");
  }
  const auto d = static_cast<Eigen::Index>(header.size()) - 1;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw ParseError(path.string() + ": header must be x1,...,xd,y");
    }
  }

  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(d + 1) + " fields, got " + std::to_string(fields.size()));
    }
    for (Eigen::Index j = 0; j < d; ++j) xs.push_back(parse_field(fields[j], line_no));
    ys.push_back(parse_field(fields[d], line_no));
  }
  if (ys.empty()) throw ParseError(path.string() + ": no samples");

  const auto n = static_cast<Eigen::Index>(ys.size());
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = xs[static_cast<std::size_t>(i * d + j)];
    y(i) = ys[static_cast<std::size_t>(i)];
  }
  return Dataset(std::move(x), std::move(y));
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  for (Eigen::Index j = 0; j < data.d(); ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      out << format_double(data.covariates()(i, j)) << ",";
    }
    out << format_double(data.responses()(i)) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GroundTruth load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  nlohmann::json j;
  in >> j;

  GroundTruth t;
  auto ws = j.at("w_star").get<std::vector<double>>();
  t.w_star = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(ws.size()));
  t.sigma = j.at("sigma").get<double>();
  t.eta = j.at("eta").get<double>();
  t.kappa = j.at("kappa").get<double>();
  for (auto idx : j.at("corrupted_indices").get<std::vector<std::int64_t>>()) {
    t.corrupted_indices.push_back(static_cast<Eigen::Index>(idx));
  }
  std::sort(t.corrupted_indices.begin(), t.corrupted_indices.end());
  return t;
}

void save_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  nlohmann::json j;
  j["w_star"] = std::vector<double>(truth.w_star.data(), truth.w_star.data() + truth.w_star.size());
  j["sigma"] = truth.sigma;
  j["eta"] = truth.eta;
  j["kappa"] = truth.kappa;
  j["corrupted_indices"] = truth.corrupted_indices;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace robreg

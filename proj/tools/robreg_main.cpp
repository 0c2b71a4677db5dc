#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "robreg/datagen.hpp"
#include "robreg/dataset.hpp"
#include "robreg/regress.hpp"
#include "robreg/rng.hpp"
#include "robreg/stats.hpp"
#include "robreg/subgauss.hpp"

namespace {

using nlohmann::json;

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("ROBREG_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    throw std::invalid_argument("ROBREG_SEED is not an unsigned integer");
  }
  return flag_seed;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

void emit(const std::optional<std::string>& path, const json& doc) {
  if (path) {
    write_text(*path, doc.dump(2) + "\n");
  } else {
    std::cout << doc.dump(2) << "\n";
  }
}

struct GenerateArgs {
  std::string family = "gaussian-identity";
  Eigen::Index d = 2;
  Eigen::Index n = 100;
  double sigma = 1.0;
  double eta = 0.0;
  std::string adversary = "idle";
  double magnitude = 100.0;
  bool inspecting = false;
  std::vector<double> w_star;
  std::vector<double> spectrum;
  int dof = 5;
  std::uint64_t seed = 0;
  std::string out = "data.csv";
  std::optional<std::string> truth_path;
};

robreg::Dataset build_dataset(const GenerateArgs& args, std::uint64_t seed,
                              std::vector<std::string>* warnings) {
  robreg::GenerativeSpec spec;
  spec.family = robreg::family_from_name(args.family);
  spec.sigma = args.sigma;
  spec.dof = args.dof;
  if (!args.w_star.empty()) {
    spec.w_star = Eigen::Map<const Eigen::VectorXd>(
        args.w_star.data(), static_cast<Eigen::Index>(args.w_star.size()));
  } else {
    // No explicit parameter: draw a standard normal w* from the seed.
    auto stream = robreg::Rng(seed).stream(0x357a);
    spec.w_star.resize(args.d);
    for (Eigen::Index j = 0; j < args.d; ++j) spec.w_star(j) = stream.normal();
  }
  if (!args.spectrum.empty()) {
    spec.spectrum = Eigen::Map<const Eigen::VectorXd>(
        args.spectrum.data(), static_cast<Eigen::Index>(args.spectrum.size()));
  }

  robreg::Dataset clean =
      robreg::generate(spec, args.n, robreg::Rng(seed).derive(1));
  robreg::AdversarySpec adv;
  adv.kind = robreg::adversary_from_name(args.adversary);
  adv.eta = args.eta;
  adv.magnitude = args.magnitude;
  adv.inspecting = args.inspecting;
  robreg::CorruptionOutcome corrupted =
      robreg::corrupt(clean, adv, robreg::Rng(seed).derive(2));
  if (warnings) *warnings = corrupted.warnings;
  return std::move(corrupted.data);
}

int cmd_generate(const GenerateArgs& args) {
  const std::uint64_t seed = effective_seed(args.seed);
  std::vector<std::string> warnings;
  const robreg::Dataset data = build_dataset(args, seed, &warnings);
  robreg::save_csv(data, args.out);
  if (args.truth_path) {
    robreg::save_truth(*data.truth(), *args.truth_path);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

struct FitArgs {
  std::string algo;
  std::string in;
  std::optional<std::string> truth_path;
  std::optional<std::string> report_path;
  double eta = 0.02;
  double sigma = 0.0;
  double kappa = 1.0;
  double w_norm = 0.0;
  std::optional<int> t_override;
  bool trace = false;
  std::uint64_t seed = 0;
};

json trace_json(const std::vector<robreg::IterationRecord>& trace) {
  json arr = json::array();
  for (const auto& rec : trace) {
    arr.push_back({{"iter", rec.iter},
                   {"grad_norm", rec.grad_norm},
                   {"lambda", rec.lambda},
                   {"ms", rec.ms}});
  }
  return arr;
}

json report_json(const robreg::FitReport& report, bool include_trace) {
  json doc;
  doc["w_hat"] = vector_json(report.w_hat);
  doc["T_used"] = report.t_used;
  doc["trace"] = include_trace ? trace_json(report.trace) : json::array();
  if (report.error_vs_truth) doc["error_vs_truth"] = *report.error_vs_truth;
  doc["seconds"] = report.seconds;
  doc["hints_defaulted"] = report.hints_defaulted;
  doc["warnings"] = report.warnings;
  if (report.w_dagger) doc["w_dagger"] = vector_json(*report.w_dagger);
  if (report.correction_norm) doc["correction_norm"] = *report.correction_norm;
  if (report.n1) doc["n1"] = *report.n1;
  if (report.survivors) doc["survivors"] = *report.survivors;
  return doc;
}

robreg::FitReport run_fit(const std::string& algo, const robreg::Dataset& data,
                          const FitArgs& args, std::uint64_t seed) {
  if (algo == "ht") {
    robreg::HtConfig cfg;
    cfg.eta = args.eta;
    cfg.sigma_hint = args.sigma;
    cfg.kappa_hint = args.kappa;
    cfg.w_norm_hint = args.w_norm;
    cfg.t_override = args.t_override;
    cfg.seed = seed;
    return robreg::fit_ht(data, cfg);
  }
  if (algo == "sg") {
    robreg::SgConfig cfg;
    cfg.eta = args.eta;
    cfg.sigma_hint = args.sigma;
    cfg.ht.sigma_hint = args.sigma;
    cfg.ht.kappa_hint = args.kappa;
    cfg.ht.w_norm_hint = args.w_norm;
    cfg.ht.t_override = args.t_override;
    cfg.seed = seed;
    return robreg::fit_sg(data, cfg);
  }
  if (algo == "ols") {
    const auto start = std::chrono::steady_clock::now();
    robreg::FitReport report;
    report.w_hat = robreg::fit_ols(data);
    if (data.truth()) {
      report.error_vs_truth = (report.w_hat - data.truth()->w_star).norm();
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
  }
  throw std::invalid_argument("unknown algo: " + algo);
}

int cmd_fit(const FitArgs& args) {
  const std::uint64_t seed = effective_seed(args.seed);
  robreg::Dataset data = robreg::load_csv(args.in);
  if (args.truth_path) {
    data = data.with_truth(robreg::load_truth(*args.truth_path));
  }
  const robreg::FitReport report = run_fit(args.algo, data, args, seed);
  emit(args.report_path, report_json(report, args.trace));
  return 0;
}

struct BenchArgs {
  std::vector<std::string> algos{"ht"};
  std::vector<double> etas{0.02};
  std::vector<Eigen::Index> ns{1000};
  Eigen::Index d = 5;
  std::string family = "gaussian-identity";
  std::string adversary = "leverage";
  double magnitude = 100.0;
  bool inspecting = false;
  double sigma = 1.0;
  int reps = 1;
  std::uint64_t seed = 0;
  std::string out = "bench.csv";
  std::optional<std::string> summary_path;
};

struct BenchRow {
  std::string algo;
  double eta;
  Eigen::Index n;
  Eigen::Index d;
  std::uint64_t seed;
  std::optional<double> error;
  double seconds = 0.0;
  std::string status = "ok";
};

int cmd_bench(const BenchArgs& args) {
  if (args.reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
  const std::uint64_t master = effective_seed(args.seed);
  const robreg::Rng rng(master);

  std::vector<BenchRow> rows;
  bool any_failed = false;
  std::uint64_t run_id = 0;
  for (const std::string& algo : args.algos) {
    for (const double eta : args.etas) {
      for (const Eigen::Index n : args.ns) {
        for (int rep = 0; rep < args.reps; ++rep) {
          const std::uint64_t run_seed = rng.derive(run_id++);
          BenchRow row{algo, eta, n, args.d, run_seed, std::nullopt, 0.0, "ok"};
          try {
            GenerateArgs gen;
            gen.family = args.family;
            gen.d = args.d;
            gen.n = n;
            gen.sigma = args.sigma;
            gen.eta = eta;
            gen.adversary = args.adversary;
            gen.magnitude = args.magnitude;
            gen.inspecting = args.inspecting;
            const robreg::Dataset data = build_dataset(gen, run_seed, nullptr);

            FitArgs fit;
            fit.eta = eta;
            fit.sigma = args.sigma;
            const auto start = std::chrono::steady_clock::now();
            const robreg::FitReport report = run_fit(algo, data, fit, run_seed);
            row.seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
            row.error = report.error_vs_truth;
          } catch (const std::exception& ex) {
            row.status = ex.what();
            for (char& c : row.status) {
              if (c == ',' || c == '\n') c = ';';
            }
            any_failed = true;
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }

  std::string csv = "algo,eta,n,d,seed,error,seconds,status\n";
  for (const auto& row : rows) {
    csv += row.algo + "," + robreg::format_double(row.eta) + "," +
           std::to_string(row.n) + "," + std::to_string(row.d) + "," +
           std::to_string(row.seed) + "," +
           (row.error ? robreg::format_double(*row.error) : "") + "," +
           robreg::format_double(row.seconds) + "," + row.status + "\n";
  }
  write_text(args.out, csv);

  // Summary: medians per cell, plus log-log slopes across the eta sweep and
  // timing ratios across the n sweep.
  json summary;
  summary["cells"] = json::array();
  for (const std::string& algo : args.algos) {
    std::vector<double> cell_etas;
    std::vector<double> eta_medians;
    std::vector<double> n_time_medians;
    for (const double eta : args.etas) {
      for (const Eigen::Index n : args.ns) {
        std::vector<double> errors;
        std::vector<double> seconds;
        for (const auto& row : rows) {
          if (row.algo == algo && row.eta == eta && row.n == n &&
              row.status == "ok" && row.error) {
            errors.push_back(*row.error);
            seconds.push_back(row.seconds);
          }
        }
        if (errors.empty()) continue;
        const double med_err = robreg::median(errors);
        const double med_sec = robreg::median(seconds);
        summary["cells"].push_back({{"algo", algo},
                                    {"eta", eta},
                                    {"n", n},
                                    {"d", args.d},
                                    {"median_error", med_err},
                                    {"median_seconds", med_sec}});
        if (args.ns.size() == 1) {
          cell_etas.push_back(eta);
          eta_medians.push_back(med_err);
        }
        if (args.etas.size() == 1) n_time_medians.push_back(med_sec);
      }
    }
    if (cell_etas.size() >= 2) {
      summary["slopes"][algo] = robreg::loglog_slope(cell_etas, eta_medians);
    }
    if (n_time_medians.size() >= 2) {
      json ratios = json::array();
      for (std::size_t i = 1; i < n_time_medians.size(); ++i) {
        ratios.push_back(n_time_medians[i] / n_time_medians[i - 1]);
      }
      summary["time_ratios"][algo] = ratios;
    }
  }
  if (args.summary_path) emit(args.summary_path, summary);

  return any_failed ? 1 : 0;
}

struct LbArgs {
  std::string which = "ht";
  double eta = 0.04;
  double sigma = 1.0;
  double kappa = 4.0;
  Eigen::Index d = 2;
  std::optional<std::string> out;
};

json atoms_json(const std::vector<robreg::DiscreteAtom>& atoms) {
  json arr = json::array();
  for (const auto& a : atoms) {
    arr.push_back({{"value", a.value}, {"prob", a.prob}});
  }
  return arr;
}

json distribution_json(const robreg::DistributionDesc& dist) {
  return {{"atoms", atoms_json(dist.response_atoms)},
          {"noise_atoms", atoms_json(dist.noise_atoms)},
          {"x_fixed", vector_json(dist.x_fixed)},
          {"w_star", vector_json(dist.w_star)},
          {"sigma", dist.sigma},
          {"eta", dist.eta}};
}

int cmd_lb_demo(const LbArgs& args) {
  robreg::LowerBoundPair pair;
  if (args.which == "ht") {
    pair = robreg::lower_bound_pair_ht(args.sigma, args.eta);
  } else if (args.which == "sg") {
    pair = robreg::lower_bound_pair_sg(args.sigma, args.eta);
  } else if (args.which == "cond") {
    pair = robreg::lower_bound_pair_cond(args.sigma, args.eta, args.kappa, args.d);
  } else {
    throw std::invalid_argument("unknown case: " + args.which);
  }

  json doc;
  doc["case"] = args.which;
  doc["eta"] = args.eta;
  doc["sigma"] = args.sigma;
  if (args.which == "cond") doc["kappa"] = args.kappa;
  doc["d1"] = distribution_json(pair.d1);
  doc["d2"] = distribution_json(pair.d2);
  doc["tv"] = pair.tv;
  doc["parameter_gap"] = pair.parameter_gap;
  doc["checks"] = {
      {"noise2_mean", robreg::atoms_mean(pair.d2.noise_atoms)},
      {"noise2_variance", robreg::atoms_variance(pair.d2.noise_atoms)},
      {"sigma_squared", args.sigma * args.sigma},
      {"tv_at_most_eta_half", pair.tv <= args.eta / 2.0 + 1e-15},
  };
  emit(args.out, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust linear regression under adversarial corruption"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "sample a dataset, optionally corrupted");
  generate->add_option("--family", gen.family, "gaussian-identity|gaussian-spectrum|student-t|bounded");
  generate->add_option("--d", gen.d, "dimension")->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "sample count")->check(CLI::PositiveNumber);
  generate->add_option("--sigma", gen.sigma, "noise scale");
  generate->add_option("--eta", gen.eta, "corruption fraction");
  generate->add_option("--adversary", gen.adversary, "idle|mean-shift|leverage|flip|lb-swap");
  generate->add_option("--magnitude", gen.magnitude, "adversary magnitude");
  generate->add_flag("--inspecting", gen.inspecting, "target largest-norm covariates");
  generate->add_option("--w-star", gen.w_star, "true parameter (defaults to a seeded draw)");
  generate->add_option("--spectrum", gen.spectrum, "covariance diagonal, max entry 1");
  generate->add_option("--dof", gen.dof, "student-t degrees of freedom");
  generate->add_option("--seed", gen.seed, "rng seed");
  generate->add_option("--out", gen.out, "output CSV path");
  generate->add_option("--truth", gen.truth_path, "ground-truth JSON path");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a linear model");
  fit_cmd->add_option("--algo", fit.algo, "ht|sg|ols")->required();
  fit_cmd->add_option("--in", fit.in, "input CSV")->required();
  fit_cmd->add_option("--truth", fit.truth_path, "ground-truth JSON");
  fit_cmd->add_option("--report", fit.report_path, "report JSON path (default stdout)");
  fit_cmd->add_option("--eta", fit.eta, "corruption fraction");
  fit_cmd->add_option("--sigma", fit.sigma, "noise scale hint (0: MAD default)");
  fit_cmd->add_option("--kappa", fit.kappa, "condition number hint");
  fit_cmd->add_option("--w-norm", fit.w_norm, "parameter norm hint (0: trimmed OLS)");
  fit_cmd->add_option("--T", fit.t_override, "iteration-count override");
  fit_cmd->add_flag("--trace", fit.trace, "include the per-iteration trace");
  fit_cmd->add_option("--seed", fit.seed, "rng seed");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "sweep and benchmark");
  bench_cmd->add_option("--algo", bench.algos, "algorithms to run");
  bench_cmd->add_option("--eta", bench.etas, "corruption fractions");
  bench_cmd->add_option("--n", bench.ns, "sample counts");
  bench_cmd->add_option("--d", bench.d, "dimension");
  bench_cmd->add_option("--family", bench.family, "generative family");
  bench_cmd->add_option("--adversary", bench.adversary, "adversary kind");
  bench_cmd->add_option("--magnitude", bench.magnitude, "adversary magnitude");
  bench_cmd->add_flag("--inspecting", bench.inspecting, "target largest-norm covariates");
  bench_cmd->add_option("--sigma", bench.sigma, "noise scale");
  bench_cmd->add_option("--reps", bench.reps, "repetitions per cell");
  bench_cmd->add_option("--seed", bench.seed, "master seed");
  bench_cmd->add_option("--out", bench.out, "CSV output path");
  bench_cmd->add_option("--summary", bench.summary_path, "summary JSON path");

  LbArgs lb;
  CLI::App* lb_cmd = app.add_subcommand("lb-demo", "print an indistinguishable pair");
  lb_cmd->add_option("--case", lb.which, "ht|sg|cond")->required();
  lb_cmd->add_option("--eta", lb.eta, "corruption fraction");
  lb_cmd->add_option("--sigma", lb.sigma, "noise scale");
  lb_cmd->add_option("--kappa", lb.kappa, "condition number (cond case)");
  lb_cmd->add_option("--d", lb.d, "dimension (cond case)");
  lb_cmd->add_option("--out", lb.out, "JSON output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cmd_generate(gen);
    if (*fit_cmd) return cmd_fit(fit);
    if (*bench_cmd) return cmd_bench(bench);
    if (*lb_cmd) return cmd_lb_demo(lb);
  } catch (const std::exception& ex) {
    std::cerr << json{{"error", ex.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}

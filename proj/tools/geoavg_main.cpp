// Command-line harness: synthetic experiment runs, Monte Carlo bound checks,
// regularization paths from a stored trace, and scheme comparisons, all
// emitting plot-ready CSV plus a JSON summary.
//
// Exit codes: 0 all checks passed, 1 a verification failed, 2 usage or config
// error, 3 numerical divergence.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "geoavg/averaging.hpp"
#include "geoavg/errors.hpp"
#include "geoavg/experiment.hpp"
#include "geoavg/problem.hpp"
#include "geoavg/regpath.hpp"
#include "geoavg/risk.hpp"
#include "geoavg/serialize.hpp"
#include "geoavg/sgd.hpp"
#include "geoavg/suites.hpp"

namespace {

using namespace geoavg;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return json::parse(in);
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_text_file(const std::string& path, const std::string& content) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << content;
}

struct ExperimentConfig {
  ProblemInstance instance;
  SgdConfig sgd;
  AveragingScheme scheme;
  std::vector<AveragingScheme> schemes;
  Index n = 0;
  Index reps = 1;
  std::uint64_t seed = 0;
  std::string output = "geoavg_out";
};

ExperimentConfig parse_experiment(const json& j, bool need_scheme) {
  ExperimentConfig config{instance_from_json(j.at("instance")),
                          sgd_config_from_json(j.at("sgd")),
                          AveragingScheme::uniform(),
                          {},
                          j.at("n").get<Index>(),
                          j.value("reps", Index{1}),
                          j.value("seed", std::uint64_t{0}),
                          j.value("output", std::string("geoavg_out"))};
  if (need_scheme) config.scheme = scheme_from_json(j.at("scheme"));
  if (j.contains("schemes"))
    for (const auto& s : j.at("schemes")) config.schemes.push_back(scheme_from_json(s));
  if (config.n < 0) throw std::invalid_argument("n must be nonnegative");
  if (config.reps < 1) throw std::invalid_argument("reps must be >= 1");
  config.sgd.validate(config.instance.dim());
  return config;
}

std::string scheme_label(const AveragingScheme& scheme) {
  switch (scheme.kind) {
    case AveragingScheme::Kind::uniform: return "uniform";
    case AveragingScheme::Kind::geometric:
      return "geometric(rho=" + format_double(scheme.rho) + ")";
    case AveragingScheme::Kind::tail:
      return "tail(tau=" + std::to_string(scheme.tau) + ")";
  }
  return "unknown";
}

// (gamma, lambda) implied by the run stepsize eta and the scheme discount rho,
// via rho = 1 - gamma lambda and eta = gamma / (1 - gamma lambda).
struct BoundParams {
  double gamma = 0.0;
  double lambda = 0.0;
};

std::optional<BoundParams> bound_params(const SgdConfig& sgd,
                                        const AveragingScheme& scheme) {
  if (sgd.mode != SgdMode::plain) return std::nullopt;
  if (scheme.kind == AveragingScheme::Kind::uniform)
    return BoundParams{sgd.eta, 0.0};
  if (scheme.kind == AveragingScheme::Kind::geometric) {
    const double gamma = sgd.eta * scheme.rho;
    const double lambda = scheme.rho == 1.0 ? 0.0 : (1.0 - scheme.rho) / gamma;
    return BoundParams{gamma, lambda};
  }
  return std::nullopt;  // no finite-time bound for tail averaging here
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<Index> reps, int workers, std::optional<std::string> out) {
  ExperimentConfig config = parse_experiment(read_json_file(config_path), true);
  if (seed) config.seed = *seed;
  if (reps) config.reps = *reps;
  if (out) config.output = *out;

  const McRiskEstimate estimate =
      mc_excess_risk(config.instance, config.sgd, config.scheme, config.n,
                     config.reps, config.seed, workers);

  const auto params = bound_params(config.sgd, config.scheme);
  std::optional<RiskReport> report;
  if (params) {
    const BoundInputs inputs = BoundInputs::from_eta(
        config.instance, config.sgd.eta, params->lambda, config.n,
        config.sgd.initial_point(config.instance.dim()));
    report = theorem1_bound(inputs);
    report->excess_risk = estimate.mean;
    report->satisfied = estimate.mean <= report->bound_total + 3.0 * estimate.stderr;
  }

  std::string csv =
      "lambda,gamma,n,excess_risk_mc,stderr,bound_total,variance_term,"
      "bias_term_1,bias_term_2,satisfied\n";
  csv += params ? format_double(params->lambda) : "na";
  csv += ',';
  csv += params ? format_double(params->gamma) : "na";
  csv += ',' + std::to_string(config.n) + ',' + format_double(estimate.mean) + ',' +
         format_double(estimate.stderr) + ',';
  if (report) {
    csv += format_double(report->bound_total) + ',' +
           format_double(report->variance_term) + ',' +
           format_double(report->bias_term_1) + ',' +
           format_double(report->bias_term_2) + ',' +
           (report->satisfied ? "1" : "0");
  } else {
    csv += "na,na,na,na,na";
  }
  csv += '\n';
  write_text_file(config.output + "_report.csv", csv);

  json summary;
  summary["command"] = "run";
  summary["n"] = config.n;
  summary["reps"] = estimate.reps;
  summary["seed"] = config.seed;
  summary["scheme"] = scheme_to_json(config.scheme);
  summary["mean_excess_risk"] = estimate.mean;
  summary["stderr"] = estimate.stderr;
  if (report) {
    summary["bound"] = risk_report_to_json(*report);
    summary["lambda"] = params->lambda;
    summary["gamma"] = params->gamma;
    if (config.n >= 1) {
      const BoundInputs inputs = BoundInputs::from_eta(
          config.instance, config.sgd.eta, params->lambda, config.n,
          config.sgd.initial_point(config.instance.dim()));
      summary["reference_bound"] = dfb_reference_bound(inputs);
    }
  } else {
    summary["bound"] = nullptr;
  }
  write_text_file(config.output + "_summary.json", summary.dump(2) + "\n");

  std::printf("mean excess risk %.6g (stderr %.3g, reps %ld)\n", estimate.mean,
              estimate.stderr, static_cast<long>(estimate.reps));
  if (report) {
    std::printf("bound %.6g  [variance %.6g, bias1 %.6g, bias2 %.6g]  %s\n",
                report->bound_total, report->variance_term, report->bias_term_1,
                report->bias_term_2, report->satisfied ? "satisfied" : "VIOLATED");
    if (!report->satisfied) return 1;
  }
  return 0;
}

int cmd_verify(const std::string& suite_arg) {
  std::vector<std::string> names;
  if (suite_arg == "all")
    names = suite_names();
  else
    names.push_back(suite_arg);

  bool all_passed = true;
  for (const std::string& name : names) {
    const SuiteResult suite = run_suite(name);
    for (const CheckResult& check : suite.checks) {
      std::printf("[%s] %s: %s (%s)\n", check.passed ? " ok " : "FAIL",
                  suite.name.c_str(), check.name.c_str(), check.detail.c_str());
      all_passed = all_passed && check.passed;
    }
  }
  return all_passed ? 0 : 1;
}

int cmd_path(const std::string& config_path, const std::vector<double>& lambda_grid,
             const std::vector<Index>& tau_grid, const std::string& validation_path,
             int workers, std::optional<double> gamma_opt,
             std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  ExperimentConfig config = parse_experiment(read_json_file(config_path), false);
  if (seed) config.seed = *seed;
  if (out) config.output = *out;
  if (lambda_grid.empty() == tau_grid.empty())
    throw std::invalid_argument("give exactly one of --lambda-grid and --tau-grid");

  SampleStream stream(config.instance, config.seed);
  const IterateTrace trace = run(stream, config.n, config.sgd, &config.instance);
  const std::string trace_id = config.output + ":seed=" + std::to_string(config.seed);
  ensure_parent_dir(config.output);
  save_trace(trace, config.output + "_trace.csv", config.output + "_trace.json");

  const Dataset validation = load_csv(validation_path);

  PathKeyKind kind = PathKeyKind::lambda;
  std::vector<PathPoint> points;
  const double gamma = gamma_opt.value_or(config.sgd.eta);
  if (!lambda_grid.empty()) {
    points = parallel_path(trace, gamma, lambda_grid, workers);
  } else {
    kind = PathKeyKind::tau;
    points = tail_path(trace, tau_grid);
  }
  const PathResult result = select(kind, points, validation, trace_id);

  std::string csv = "key_kind,key_value,validation_error,selected";
  for (Index i = 0; i < trace.dim(); ++i) csv += ",w_" + std::to_string(i);
  csv += '\n';
  for (std::size_t j = 0; j < result.entries.size(); ++j) {
    const PathEntry& entry = result.entries[j];
    csv += to_string(result.kind) + ',' + format_double(entry.key) + ',' +
           format_double(entry.validation_error) + ',' +
           (j == result.selected_index ? "1" : "0");
    for (Index i = 0; i < entry.solution.size(); ++i)
      csv += ',' + format_double(entry.solution(i));
    csv += '\n';
  }
  write_text_file(config.output + "_path.csv", csv);

  const PathEntry& selected = result.entries[result.selected_index];
  json summary;
  summary["command"] = "path";
  summary["key_kind"] = to_string(result.kind);
  summary["selected_key"] = selected.key;
  summary["selected_index"] = result.selected_index;
  summary["validation_error"] = selected.validation_error;
  summary["trace_id"] = trace_id;
  summary["n"] = config.n;
  summary["seed"] = config.seed;
  if (!lambda_grid.empty()) summary["gamma"] = gamma;
  write_text_file(config.output + "_summary.json", summary.dump(2) + "\n");

  std::printf("selected %s = %.12g (validation error %.6g)\n",
              to_string(result.kind).c_str(), selected.key,
              selected.validation_error);
  return 0;
}

int cmd_compare(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::optional<Index> reps, int workers,
                std::optional<std::string> out) {
  const json j = read_json_file(config_path);
  ExperimentConfig config = parse_experiment(j, false);
  if (seed) config.seed = *seed;
  if (reps) config.reps = *reps;
  if (out) config.output = *out;
  if (config.schemes.size() < 2)
    throw std::invalid_argument("compare needs at least two schemes in the config");

  std::vector<Index> horizons{config.n};
  if (j.contains("n_grid")) {
    horizons.clear();
    for (const auto& v : j.at("n_grid")) horizons.push_back(v.get<Index>());
  }

  std::string csv = "n,scheme,mean_excess_risk,stderr\n";
  json rows = json::array();
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    const auto estimates = mc_excess_risk_multi(
        config.instance, config.sgd, config.schemes, horizons[h], config.reps,
        derive_seed(config.seed, 0xC0FFEE + h), workers);
    for (std::size_t s = 0; s < config.schemes.size(); ++s) {
      csv += std::to_string(horizons[h]) + ',' + scheme_label(config.schemes[s]) +
             ',' + format_double(estimates[s].mean) + ',' +
             format_double(estimates[s].stderr) + '\n';
      json row;
      row["n"] = horizons[h];
      row["scheme"] = scheme_label(config.schemes[s]);
      row["mean_excess_risk"] = estimates[s].mean;
      row["stderr"] = estimates[s].stderr;
      rows.push_back(std::move(row));
    }
  }
  write_text_file(config.output + "_compare.csv", csv);
  json summary;
  summary["command"] = "compare";
  summary["reps"] = config.reps;
  summary["seed"] = config.seed;
  summary["rows"] = std::move(rows);
  write_text_file(config.output + "_summary.json", summary.dump(2) + "\n");
  std::printf("compared %zu schemes over %zu horizon(s)\n", config.schemes.size(),
              horizons.size());
  return 0;
}

int cmd_synth(const std::string& instance_path, Index n, std::uint64_t seed,
              const std::string& out) {
  const ProblemInstance instance = instance_from_json(read_json_file(instance_path));
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const Dataset data = sample_stream(instance, n, seed);
  ensure_parent_dir(out);
  save_csv(data, out + ".csv");
  json summary;
  summary["command"] = "synth";
  summary["n"] = n;
  summary["seed"] = seed;
  summary["dim"] = instance.dim();
  summary["file"] = out + ".csv";
  write_text_file(out + "_summary.json", summary.dump(2) + "\n");
  std::printf("wrote %ld samples of dimension %ld to %s.csv\n", static_cast<long>(n),
              static_cast<long>(instance.dim()), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGD for least squares with geometric iterate averaging"};
  app.require_subcommand(1);

  std::string config_path, validation_path, instance_path, suite_name;
  std::string out_flag;
  std::uint64_t seed_flag = 0;
  long reps_flag = 0;
  int workers = 0;
  double gamma_flag = 0.0;
  std::vector<double> lambda_grid;
  std::vector<long> tau_grid_raw;
  long synth_n = 0;

  auto* run_cmd = app.add_subcommand("run", "Monte Carlo run with bound check");
  run_cmd->add_option("--config", config_path, "experiment JSON")->required();
  auto* run_seed = run_cmd->add_option("--seed", seed_flag, "master seed");
  auto* run_reps = run_cmd->add_option("--reps", reps_flag, "replicates");
  run_cmd->add_option("--workers", workers, "max worker threads");
  auto* run_out = run_cmd->add_option("--out", out_flag, "output prefix");

  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd
      ->add_option("suite", suite_name,
                   "prop1|prop2|prop3|lemma1|parallel|additive|all")
      ->required();

  auto* path_cmd = app.add_subcommand("path", "regularization path from one trace");
  path_cmd->add_option("--config", config_path, "experiment JSON")->required();
  path_cmd->add_option("--validation", validation_path, "validation CSV")->required();
  path_cmd->add_option("--lambda-grid", lambda_grid, "lambda grid (ascending)");
  path_cmd->add_option("--tau-grid", tau_grid_raw, "tail start indices");
  auto* path_gamma = path_cmd->add_option(
      "--gamma", gamma_flag, "discount stepsize (default: the sgd eta)");
  path_cmd->add_option("--workers", workers, "max worker threads");
  auto* path_seed = path_cmd->add_option("--seed", seed_flag, "master seed");
  auto* path_out = path_cmd->add_option("--out", out_flag, "output prefix");

  auto* compare_cmd = app.add_subcommand("compare", "MC risk per averaging scheme");
  compare_cmd->add_option("--config", config_path, "experiment JSON")->required();
  auto* cmp_seed = compare_cmd->add_option("--seed", seed_flag, "master seed");
  auto* cmp_reps = compare_cmd->add_option("--reps", reps_flag, "replicates");
  compare_cmd->add_option("--workers", workers, "max worker threads");
  auto* cmp_out = compare_cmd->add_option("--out", out_flag, "output prefix");

  auto* synth_cmd = app.add_subcommand("synth", "emit a synthetic CSV dataset");
  synth_cmd->add_option("--config", instance_path, "instance JSON")->required();
  synth_cmd->add_option("--n", synth_n, "sample count")->required();
  synth_cmd->add_option("--seed", seed_flag, "stream seed");
  synth_cmd->add_option("--out", out_flag, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto opt_seed = [&](CLI::Option* o) {
    return o->count() ? std::optional<std::uint64_t>(seed_flag) : std::nullopt;
  };
  const auto opt_reps = [&](CLI::Option* o) {
    return o->count() ? std::optional<Index>(reps_flag) : std::nullopt;
  };
  const auto opt_out = [&](CLI::Option* o) {
    return o->count() ? std::optional<std::string>(out_flag) : std::nullopt;
  };

  try {
    if (run_cmd->parsed())
      return cmd_run(config_path, opt_seed(run_seed), opt_reps(run_reps), workers,
                     opt_out(run_out));
    if (verify_cmd->parsed()) return cmd_verify(suite_name);
    if (path_cmd->parsed()) {
      const std::vector<Index> tau_grid(tau_grid_raw.begin(), tau_grid_raw.end());
      return cmd_path(config_path, lambda_grid, tau_grid, validation_path, workers,
                      path_gamma->count() ? std::optional<double>(gamma_flag)
                                          : std::nullopt,
                      opt_seed(path_seed), opt_out(path_out));
    }
    if (compare_cmd->parsed())
      return cmd_compare(config_path, opt_seed(cmp_seed), opt_reps(cmp_reps), workers,
                         opt_out(cmp_out));
    if (synth_cmd->parsed()) return cmd_synth(instance_path, synth_n, seed_flag, out_flag);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

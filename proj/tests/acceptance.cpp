// Acceptance suite: every check below pins its tolerance in code and prints
// one PASS/FAIL line. Exit status is the number of failed criteria.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "geoavg/averaging.hpp"
#include "geoavg/experiment.hpp"
#include "geoavg/problem.hpp"
#include "geoavg/regpath.hpp"
#include "geoavg/risk.hpp"
#include "geoavg/serialize.hpp"
#include "geoavg/sgd.hpp"
#include "geoavg/suites.hpp"

using namespace geoavg;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool passed,
            const std::string& detail) {
  std::printf("[%s] %02d %s (%s)\n", passed ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  if (!passed) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

ProblemInstance prop1_instance() {
  VectorXd spectrum(5);
  spectrum << 1.0, 0.5, 0.25, 0.1, 0.01;
  return make_instance(5, spectrum, VectorXd::Ones(5), 0.0);
}

// 1. Limit equivalence: both deterministic recursions reach the ridge
//    solution on the d = 5 instance at T = 1e4.
void criterion_limit_equivalence() {
  const auto instance = prop1_instance();
  bool passed = false;
  std::string detail;
  try {
    const auto r = verify_limit_equivalence(instance, 0.1, 0.5, 1e-6, 10000);
    passed = r.tikhonov_residual <= 1e-8 && r.average_residual <= 1e-6;
    detail = "tikhonov " + fmt(r.tikhonov_residual) + " <= 1e-8, average " +
             fmt(r.average_residual) + " <= 1e-6";
  } catch (const std::exception& e) {
    detail = e.what();
  }
  report(1, "limit equivalence with the ridge solution", passed, detail);
}

// 2. Finite-t identities on scalar instances over gamma*lambda grids.
void criterion_finite_equivalence() {
  double worst_exact = 0.0, worst_ratio_excess = -1.0;
  for (const double gl : {0.01, 0.1, 0.5}) {
    const double eta = 0.95;
    const double gamma = eta * (1.0 - gl);
    const double lambda = gl / gamma;
    const auto scalar = make_instance(1, VectorXd::Ones(1), VectorXd::Ones(1), 0.0);
    const auto series = verify_finite_equivalence_series(scalar, gamma, lambda, 1000);
    for (const auto& r : series) worst_exact = std::max(worst_exact, r.r_exact);
    for (std::size_t i = 4; i + 1 < series.size(); ++i) {
      if (series[i + 1].r_paper < 1e-8) break;  // rounding floor
      worst_ratio_excess =
          std::max(worst_ratio_excess,
                   series[i + 1].r_paper / series[i].r_paper - (1.0 - gl));
    }
  }
  const bool passed = worst_exact <= 1e-10 && worst_ratio_excess <= 1e-6;
  report(2, "finite-t equivalence identities", passed,
         "max r_exact " + fmt(worst_exact) + " <= 1e-10, max decay-ratio excess " +
             fmt(worst_ratio_excess) + " <= 1e-6");
}

// 3. Normalizer bounds over the full log-spaced grid.
void criterion_lemma1_grid() {
  const SuiteResult suite = run_suite("lemma1");
  double min_margin = 1e300;
  for (const auto& check : suite.checks) min_margin = std::min(min_margin, check.value);
  report(3, "normalizer bounds on the (n, gamma*lambda) grid", suite.passed(),
         "min margin " + fmt(min_margin) + " >= 0");
}

// 4. One-sided Monte Carlo check of the finite-time bound, three lambdas.
void criterion_theorem1_mc() {
  VectorXd spectrum(10);
  for (Index i = 0; i < 10; ++i) spectrum(i) = 1.0 / static_cast<double>(i + 1);
  const auto instance = make_instance(10, spectrum, VectorXd::Ones(10), 0.5);
  const auto moment = moment_constants(instance);
  const double eta = 1.0 / (2.0 * moment.r_squared);
  const Index n = 1000, reps = 500;

  // lambda = c/(gamma (n+1)) with gamma = eta/(1 + eta lambda) resolves to
  // lambda = c/(eta (n+1-c)).
  std::vector<double> lambdas;
  std::vector<AveragingScheme> schemes;
  for (const double c : {0.0, 1.0, 10.0}) {
    const double lambda = c == 0.0 ? 0.0 : c / (eta * (n + 1.0 - c));
    lambdas.push_back(lambda);
    schemes.push_back(AveragingScheme::geometric(1.0 / (1.0 + eta * lambda)));
  }

  SgdConfig config;
  config.eta = eta;
  const auto estimates =
      mc_excess_risk_multi(instance, config, schemes, n, reps, 424242u);

  bool passed = true;
  std::string detail;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const BoundInputs inputs =
        BoundInputs::from_eta(instance, eta, lambdas[j], n, VectorXd());
    const RiskReport bound = theorem1_bound(inputs);
    const bool ok =
        estimates[j].mean <= bound.bound_total + 3.0 * estimates[j].stderr;
    passed = passed && ok;
    if (j) detail += "; ";
    detail += "lambda=" + fmt(lambdas[j]) + ": " + fmt(estimates[j].mean) +
              " <= " + fmt(bound.bound_total) + "+3se";
  }
  report(4, "finite-time bound holds in Monte Carlo", passed, detail);
}

// 5. Additive-noise model bound, lambda in {0, 1/(gamma(n+1))}.
void criterion_additive() {
  const SuiteResult suite = run_suite("additive");
  std::string detail;
  for (const auto& check : suite.checks) {
    if (!detail.empty()) detail += "; ";
    detail += check.detail;
  }
  report(5, "additive-noise bound holds in Monte Carlo", suite.passed(), detail);
}

// 6. Reduction identities between schemes and modes.
void criterion_reductions() {
  VectorXd spectrum(4);
  spectrum << 1.0, 0.5, 0.25, 0.125;
  const auto instance = make_instance(4, spectrum, VectorXd::Ones(4), 0.4);
  SgdConfig plain_cfg;
  plain_cfg.eta = 0.1;
  SampleStream stream(instance, 606);
  const IterateTrace trace = run(stream, 1000, plain_cfg, &instance);

  const VectorXd uniform = average(trace, AveragingScheme::uniform());
  const double geo_gap =
      (average(trace, AveragingScheme::geometric(1.0)) - uniform)
          .cwiseAbs()
          .maxCoeff();
  const double tail_gap =
      (average(trace, AveragingScheme::tail(0)) - uniform).cwiseAbs().maxCoeff();

  const Dataset data = sample_stream(instance, 500, 707);
  SgdConfig tik_cfg = plain_cfg;
  tik_cfg.mode = SgdMode::tikhonov;
  tik_cfg.lambda = 0.0;
  const bool bitwise = run(data, plain_cfg).iterates == run(data, tik_cfg).iterates;

  const bool passed = geo_gap <= 1e-14 && tail_gap <= 1e-14 && bitwise;
  report(6, "scheme and mode reduction identities", passed,
         "geometric(1) gap " + fmt(geo_gap) + ", tail(0) gap " + fmt(tail_gap) +
             ", tikhonov(0) bitwise " + (bitwise ? "yes" : "no"));
}

// 7. Parallel combine matches serial for several partitions, and the path
//    command produces identical bytes for any worker count.
void criterion_parallel() {
  const SuiteResult suite = run_suite("parallel");
  bool passed = suite.passed();
  double worst = 0.0;
  for (const auto& check : suite.checks) worst = std::max(worst, check.value);

  std::string detail = "max combine error " + fmt(worst) + " <= 1e-12";
  const fs::path dir =
      fs::temp_directory_path() / ("geoavg_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto path_str = [&](const std::string& name) {
    return (dir / name).string();
  };
  {
    VectorXd spectrum(3);
    spectrum << 1.0, 0.5, 0.25;
    const auto instance = make_instance(3, spectrum, VectorXd::Ones(3), 0.3);
    nlohmann::json config;
    config["instance"] = instance_to_json(instance);
    config["sgd"] = {{"eta", 0.1}};
    config["n"] = 1000;
    config["seed"] = 51;
    std::ofstream(path_str("config.json")) << config.dump();
    save_csv(sample_stream(instance, 200, 99), path_str("val.csv"));

    std::vector<std::string> outputs;
    bool cli_ok = true;
    for (const int workers : {1, 4, 7}) {
      const std::string out = path_str("w" + std::to_string(workers));
      const std::string cmd = std::string(GEOAVG_CLI_PATH) + " path --config " +
                              path_str("config.json") +
                              " --lambda-grid 0 0.05 0.2 1.0 --validation " +
                              path_str("val.csv") + " --workers " +
                              std::to_string(workers) + " --out " + out +
                              " >/dev/null 2>&1";
      cli_ok = cli_ok && std::system(cmd.c_str()) == 0;
      std::ifstream in(out + "_path.csv");
      std::ostringstream content;
      content << in.rdbuf();
      outputs.push_back(content.str());
    }
    const bool identical = cli_ok && outputs.size() == 3 && !outputs[0].empty() &&
                           outputs[0] == outputs[1] && outputs[0] == outputs[2];
    passed = passed && identical;
    detail += std::string(", path CSV identical across workers ") +
              (identical ? "yes" : "no");
  }
  fs::remove_all(dir);
  report(7, "parallel averaging is exact and worker-count independent", passed,
         detail);
}

// 8. Existence and absence of a variance-reducing regularization level.
void criterion_lambda_star() {
  const SuiteResult suite = run_suite("prop3");
  std::string detail;
  for (const auto& check : suite.checks) {
    if (!detail.empty()) detail += "; ";
    detail += check.detail;
  }
  report(8, "variance-reduction regime for lambda*", suite.passed(), detail);
}

// 9. Probabilistic early stopping: the mean of w_G over the expected-iterate
//    trace is the ridge solution, componentwise within 3 stderr.
void criterion_stopping() {
  const auto instance = prop1_instance();
  const double gamma = 0.1, lambda = 0.5;
  const double gl = gamma * lambda;
  SgdConfig config;
  config.eta = gamma / (1.0 - gl);
  const Index length = static_cast<Index>(std::ceil(20.0 / gl));
  const IterateTrace trace = expected_trace(length, instance, config);

  const VectorXd ridge = ridge_solution(instance.sigma, instance.exy(), lambda);
  Rng rng(2718281828u);
  const int reps = 100000;
  VectorXd mean = VectorXd::Zero(5);
  VectorXd sq = VectorXd::Zero(5);
  for (int i = 0; i < reps; ++i) {
    const VectorXd w = geometric_stopping_sample(trace, gl, rng);
    mean += w;
    sq += w.cwiseProduct(w);
  }
  mean /= reps;
  const VectorXd se =
      ((sq / reps - mean.cwiseProduct(mean)) / reps).cwiseMax(0.0).cwiseSqrt();
  const bool passed =
      ((mean - ridge).cwiseAbs().array() <= 3.0 * se.array() + 1e-12).all();
  report(9, "geometric stopping recovers the ridge solution", passed,
         "max |mean - ridge| " + fmt((mean - ridge).cwiseAbs().maxCoeff()) +
             " within 3se (max se " + fmt(se.maxCoeff()) + ")");
}

// 10. Streaming and batch geometric averages agree on a 1e5-step trace.
void criterion_streaming() {
  VectorXd spectrum(3);
  spectrum << 1.0, 0.5, 0.1;
  const auto instance = make_instance(3, spectrum, VectorXd::Ones(3), 0.5);
  SgdConfig config;
  config.eta = 0.05;
  SampleStream stream(instance, 8080);
  const IterateTrace trace = run(stream, 100000, config, &instance);

  bool passed = true;
  std::string detail;
  for (const double rho : {0.9, 0.999, 0.99999}) {
    OnlineGeometricAverage online(rho, 3);
    for (Index t = 0; t < trace.length(); ++t) online.update(trace.iterate(t));
    const VectorXd batch = average(trace, AveragingScheme::geometric(rho));
    const double rel = (online.value() - batch).norm() / batch.norm();
    passed = passed && rel <= 1e-10;
    if (!detail.empty()) detail += ", ";
    detail += "rho=" + fmt(rho) + ": " + fmt(rel);
  }
  report(10, "streaming equals batch averaging to 1e-10", passed, detail);
}

// 11. Moment assumptions verified by Monte Carlo at d = 4, 1e6 samples.
void criterion_assumptions() {
  VectorXd spectrum(4);
  spectrum << 2.0, 1.0, 0.5, 0.25;
  const auto instance =
      make_instance(4, spectrum, VectorXd::Ones(4), 0.5, CovariateLaw::gaussian, 3);
  const MatrixXd sigma = instance.sigma.dense();
  const MatrixXd fourth_expected = sigma.trace() * sigma + 2.0 * sigma * sigma;
  const MatrixXd noise_expected =
      instance.noise_sigma * instance.noise_sigma * sigma;

  MatrixXd fourth_mean = MatrixXd::Zero(4, 4), fourth_m2 = MatrixXd::Zero(4, 4);
  MatrixXd noise_mean = MatrixXd::Zero(4, 4), noise_m2 = MatrixXd::Zero(4, 4);
  SampleStream stream(instance, 161803u);
  const long reps = 1000000;
  for (long i = 1; i <= reps; ++i) {
    const Sample s = stream.next();
    const MatrixXd outer = s.x * s.x.transpose();
    const MatrixXd fourth = s.x.squaredNorm() * outer;
    const double eps = s.y - instance.w_star.dot(s.x);
    const MatrixXd noise = eps * eps * outer;
    MatrixXd delta = fourth - fourth_mean;
    fourth_mean += delta / static_cast<double>(i);
    fourth_m2 += delta.cwiseProduct(fourth - fourth_mean);
    delta = noise - noise_mean;
    noise_mean += delta / static_cast<double>(i);
    noise_m2 += delta.cwiseProduct(noise - noise_mean);
  }
  const MatrixXd fourth_se =
      (fourth_m2 / double(reps - 1) / double(reps)).cwiseSqrt();
  const MatrixXd noise_se = (noise_m2 / double(reps - 1) / double(reps)).cwiseSqrt();
  const bool fourth_ok = ((fourth_mean - fourth_expected).cwiseAbs().array() <=
                          3.0 * fourth_se.array())
                             .all();
  const bool noise_ok =
      ((noise_mean - noise_expected).cwiseAbs().array() <= 3.0 * noise_se.array())
          .all();
  const double fourth_z =
      ((fourth_mean - fourth_expected).cwiseAbs().array() / fourth_se.array())
          .maxCoeff();
  const double noise_z =
      ((noise_mean - noise_expected).cwiseAbs().array() / noise_se.array())
          .maxCoeff();
  report(11, "moment assumptions hold within 3 stderr", fourth_ok && noise_ok,
         "fourth-moment max z " + fmt(fourth_z) + ", noise-moment max z " +
             fmt(noise_z));
}

}  // namespace

int main() {
  criterion_limit_equivalence();
  criterion_finite_equivalence();
  criterion_lemma1_grid();
  criterion_theorem1_mc();
  criterion_additive();
  criterion_reductions();
  criterion_parallel();
  criterion_lambda_star();
  criterion_stopping();
  criterion_streaming();
  criterion_assumptions();
  if (failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}

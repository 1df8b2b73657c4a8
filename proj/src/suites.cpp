#include "geoavg/suites.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "geoavg/averaging.hpp"
#include "geoavg/errors.hpp"
#include "geoavg/experiment.hpp"
#include "geoavg/problem.hpp"
#include "geoavg/risk.hpp"
#include "geoavg/sgd.hpp"

namespace geoavg {

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

CheckResult residual_check(const std::string& name, double value, double threshold) {
  CheckResult check;
  check.name = name;
  check.value = value;
  check.threshold = threshold;
  check.passed = value <= threshold;
  check.detail = fmt(value) + " <= " + fmt(threshold);
  return check;
}

ProblemInstance prop1_instance() {
  VectorXd spectrum(5);
  spectrum << 1.0, 0.5, 0.25, 0.1, 0.01;
  return make_instance(5, spectrum, VectorXd::Ones(5), 0.0);
}

SuiteResult suite_prop1() {
  SuiteResult suite{"prop1", {}};
  const ProblemInstance instance = prop1_instance();
  const double gamma = 0.1, lambda = 0.5;
  const Index max_t = 10000;
  try {
    const auto report = verify_limit_equivalence(instance, gamma, lambda, 1e-6, max_t);
    suite.checks.push_back(residual_check("regularized iterates reach the ridge solution",
                                          report.tikhonov_residual, 1e-8));
    suite.checks.push_back(residual_check("geometric average reaches the ridge solution",
                                          report.average_residual, 1e-6));
  } catch (const ConvergenceError& e) {
    suite.checks.push_back(residual_check("limit equivalence", e.residual(), 1e-6));
  }
  return suite;
}

SuiteResult suite_prop2() {
  SuiteResult suite{"prop2", {}};
  // Scalar instance with contraction factor 1 - eta s = 0.05, so the decay of
  // the printed-identity residual is clean from t = 5 on.
  const double eta = 0.95;
  const Index t_max = 1000;
  for (const double gl : {0.01, 0.1, 0.5}) {
    const double gamma = eta * (1.0 - gl);
    const double lambda = gl / gamma;
    const ProblemInstance scalar =
        make_instance(1, VectorXd::Ones(1), VectorXd::Ones(1), 0.0);
    const auto series = verify_finite_equivalence_series(scalar, gamma, lambda, t_max);

    double worst_exact = 0.0;
    for (const auto& r : series) worst_exact = std::max(worst_exact, r.r_exact);
    suite.checks.push_back(residual_check(
        "exact identity residual, gamma*lambda=" + fmt(gl), worst_exact, 1e-10));

    // Ratio of successive printed-identity residuals, checked while the
    // residual is still clear of rounding noise.
    double worst_ratio = 0.0;
    for (std::size_t i = 4; i + 1 < series.size(); ++i) {  // series[4] is t = 5
      if (series[i + 1].r_paper < 1e-8) break;
      worst_ratio = std::max(worst_ratio, series[i + 1].r_paper / series[i].r_paper);
    }
    suite.checks.push_back(residual_check(
        "printed identity decays at rate rho, gamma*lambda=" + fmt(gl), worst_ratio,
        (1.0 - gl) + 1e-6));
  }
  return suite;
}

SuiteResult suite_prop3() {
  SuiteResult suite{"prop3", {}};
  {
    VectorXd spectrum(10);
    for (Index i = 0; i < 10; ++i)
      spectrum(i) = 1.0 / static_cast<double>((i + 1) * (i + 1));
    const ProblemInstance poor =
        make_instance(10, spectrum, VectorXd::Ones(10), 0.0);
    const auto lambda_star = find_lambda_star(poor, 0.1, 50);
    CheckResult exists;
    exists.name = "poorly conditioned spectrum admits lambda* (f(lambda*) < d/n)";
    if (lambda_star) {
      const double f_star = variance_profile(poor, 0.1, 50, *lambda_star).f;
      exists.value = f_star;
      exists.threshold = 0.2;
      exists.passed = f_star < 0.2;
      exists.detail = "lambda*=" + fmt(*lambda_star) + ", f=" + fmt(f_star) + " < 0.2";
    } else {
      exists.passed = false;
      exists.detail = "no lambda* returned";
    }
    suite.checks.push_back(exists);
  }
  {
    const ProblemInstance good =
        make_instance(10, VectorXd::Ones(10), VectorXd::Ones(10), 0.0);
    const auto lambda_star = find_lambda_star(good, 0.1, 400);
    CheckResult absent;
    absent.name = "identity covariance at large n yields no lambda*";
    absent.passed = !lambda_star.has_value();
    absent.detail = absent.passed ? "absent" : "unexpected lambda*";
    suite.checks.push_back(absent);
  }
  return suite;
}

SuiteResult suite_lemma1() {
  SuiteResult suite{"lemma1", {}};
  std::set<Index> n_grid;
  for (int i = 0; i <= 40; ++i)
    n_grid.insert(std::max<Index>(
        1, static_cast<Index>(std::llround(std::pow(10.0, 4.0 * i / 40.0)))));
  std::vector<double> gl_grid;
  const double lo = std::log10(1e-4), hi = std::log10(0.5);
  for (int i = 0; i <= 24; ++i)
    gl_grid.push_back(std::pow(10.0, lo + (hi - lo) * i / 24.0));

  double min_margin1 = 1e300, min_margin2 = 1e300;
  for (const Index n : n_grid) {
    for (const double gl : gl_grid) {
      const double c = normalizer_c(n, gl);
      const auto [bound1, bound2] = c_bounds(n, gl);
      const double rho2 = (1.0 - gl) * (1.0 - gl);
      double sum = 0.0, w = rho2;
      for (Index t = 1; t <= n; ++t) {
        sum += w;
        w *= rho2;
        if (w == 0.0) break;
      }
      min_margin1 = std::min(min_margin1, bound1 - c * c);
      min_margin2 = std::min(min_margin2, bound2 - c * c * sum);
    }
  }
  CheckResult first;
  first.name = "c_n^2 <= (gamma*lambda + 1/(n+1))^2 on the full grid";
  first.value = min_margin1;
  first.passed = min_margin1 >= 0.0;
  first.detail = "min margin " + fmt(min_margin1);
  suite.checks.push_back(first);
  CheckResult second;
  second.name = "c_n^2 sum rho^{2t} <= second bound on the full grid";
  second.value = min_margin2;
  second.passed = min_margin2 >= 0.0;
  second.detail = "min margin " + fmt(min_margin2);
  suite.checks.push_back(second);
  return suite;
}

SuiteResult suite_parallel() {
  SuiteResult suite{"parallel", {}};
  VectorXd spectrum(4);
  spectrum << 2.0, 1.0, 0.5, 0.25;
  VectorXd w_star(4);
  w_star << 1.0, -1.0, 2.0, 0.5;
  const ProblemInstance instance = make_instance(4, spectrum, w_star, 0.3);
  SgdConfig config;
  config.eta = 0.2;
  const Index n = 1000;
  SampleStream stream(instance, 991);
  const IterateTrace trace = run(stream, n, config, &instance);
  const double rho = 0.95;
  const VectorXd serial = average(trace, AveragingScheme::geometric(rho));

  for (const Index k : std::vector<Index>{1, 2, 7, 16, n + 1}) {
    std::vector<PartialGeometricSum> partials;
    Index begin = 0;
    for (Index b = 0; b < k; ++b) {
      const Index end = (b + 1 == k) ? n + 1 : begin + (n + 1) / k;
      partials.push_back(partial_geometric_sum(trace.iterates, begin, end, rho));
      begin = end;
    }
    const VectorXd combined = parallel_geometric_combine(partials, rho);
    const double rel = (combined - serial).norm() / serial.norm();
    suite.checks.push_back(
        residual_check("combine matches serial, K=" + std::to_string(k), rel, 1e-12));
  }
  return suite;
}

SuiteResult suite_additive() {
  SuiteResult suite{"additive", {}};
  VectorXd spectrum(10);
  for (Index i = 0; i < 10; ++i) spectrum(i) = 1.0 / static_cast<double>(i + 1);
  const ProblemInstance instance =
      make_instance(10, spectrum, VectorXd::Ones(10), 0.5);
  const MomentConstants moment = moment_constants(instance);
  const double eta = 1.0 / (2.0 * moment.r_squared);
  const Index n = 1000, reps = 500;
  const MatrixXd noise_cov = additive_noise_covariance(instance);

  SgdConfig config;
  config.eta = eta;
  config.mode = SgdMode::additive_noise_plain;
  for (const double lambda : {0.0, 1.0 / (eta * static_cast<double>(n))}) {
    const double gamma = eta / (1.0 + eta * lambda);
    const double rho = 1.0 - gamma * lambda;
    const auto estimate = mc_excess_risk(instance, config,
                                         AveragingScheme::geometric(rho), n, reps,
                                         7151u);
    const BoundInputs inputs =
        BoundInputs::from_eta(instance, eta, lambda, n, VectorXd());
    const double bound = additive_bound(inputs, noise_cov);
    suite.checks.push_back(residual_check(
        "mc mean <= additive bound + 3 stderr, lambda=" + fmt(lambda), estimate.mean,
        bound + 3.0 * estimate.stderr));
  }
  return suite;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"prop1", "prop2", "prop3", "lemma1", "parallel", "additive"};
}

SuiteResult run_suite(const std::string& name) {
  if (name == "prop1") return suite_prop1();
  if (name == "prop2") return suite_prop2();
  if (name == "prop3") return suite_prop3();
  if (name == "lemma1") return suite_lemma1();
  if (name == "parallel") return suite_parallel();
  if (name == "additive") return suite_additive();
  throw std::invalid_argument("unknown verification suite: " + name);
}

}  // namespace geoavg

#include "geoavg/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoavg/averaging.hpp"
#include "geoavg/detail/accumulators.hpp"
#include "geoavg/errors.hpp"
#include "geoavg/sgd.hpp"

namespace geoavg {

VectorXd ridge_solution(const SpectralCovariance& sigma, const VectorXd& exy,
                        double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (exy.size() != sigma.dim())
    throw std::invalid_argument("ridge_solution: dimension mismatch");
  const VectorXd& s = sigma.eigenvalues();
  for (Index i = 0; i < s.size(); ++i)
    if (!(s(i) + lambda > 0.0))
      throw std::invalid_argument("singular covariance with lambda = 0");
  return sigma.apply_fn([lambda](double si) { return 1.0 / (si + lambda); }, exy);
}

double excess_risk(const VectorXd& w, const ProblemInstance& instance) {
  if (w.size() != instance.dim())
    throw std::invalid_argument("excess_risk: dimension mismatch");
  const VectorXd diff = w - instance.w_star;
  return instance.sigma.quad_form([](double si) { return si; }, diff);
}

BoundInputs BoundInputs::from_eta(const ProblemInstance& instance, double eta,
                                  double lambda, Index n, VectorXd w0) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  BoundInputs in;
  in.instance = &instance;
  in.eta = eta;
  in.lambda = lambda;
  in.gamma = eta / (1.0 + eta * lambda);
  in.n = n;
  in.w0 = w0.size() == 0 ? VectorXd::Zero(instance.dim()).eval() : std::move(w0);
  in.moment = moment_constants(instance);
  return in;
}

BoundInputs BoundInputs::from_gamma(const ProblemInstance& instance, double gamma,
                                    double lambda, Index n, VectorXd w0) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (gamma * lambda >= 1.0)
    throw std::invalid_argument("gamma*lambda must be < 1");
  BoundInputs in;
  in.instance = &instance;
  in.gamma = gamma;
  in.lambda = lambda;
  in.eta = gamma / (1.0 - gamma * lambda);
  in.n = n;
  in.w0 = w0.size() == 0 ? VectorXd::Zero(instance.dim()).eval() : std::move(w0);
  in.moment = moment_constants(instance);
  return in;
}

RiskReport theorem1_bound(const BoundInputs& inputs) {
  const ProblemInstance& instance = *inputs.instance;
  const double eta = inputs.eta;
  const double gamma = inputs.gamma;
  const double lambda = inputs.lambda;
  const double r2 = inputs.moment.r_squared;

  // Preconditions of the bound; violations raise rather than evaluate.
  if (!(eta <= 1.0 / (2.0 * r2) * (1.0 + 1e-12)))
    throw BoundInapplicableError("bound needs eta <= 1/(2 R^2)");
  if (!(lambda >= 0.0) || !(eta * lambda < 1.0))
    throw BoundInapplicableError("bound needs lambda in [0, 1/eta)");
  const double gl = gamma * lambda;
  if (!(gl < 1.0)) throw BoundInapplicableError("bound needs gamma*lambda < 1");

  const double n1 = static_cast<double>(inputs.n + 1);
  const double sigma2 = inputs.moment.sigma_squared;
  const VectorXd diff = inputs.w0 - instance.w_star;

  const double tr_var = instance.sigma.trace_fn(
      [lambda](double s) { return s * s / ((s + lambda) * (s + lambda)); });
  const double variance = 4.0 / (1.0 - gl) *
                          (gl / (2.0 - gl) + 2.0 / ((2.0 - gl) * n1)) * sigma2 *
                          tr_var / (2.0 - eta * r2);

  const double reg_level = lambda + 1.0 / (gamma * n1);
  const double half = 0.5 * lambda;
  const double bias1 =
      2.0 * reg_level * reg_level *
      instance.sigma.quad_form(
          [half](double s) { return s / ((s + half) * (s + half)); }, diff);
  const double bias2 =
      reg_level * reg_level *
      instance.sigma.trace_fn([lambda](double s) { return s / (s + lambda); }) *
      instance.sigma.quad_form([half](double s) { return 1.0 / (s + half); }, diff);

  RiskReport report;
  report.variance_term = variance;
  report.bias_term_1 = bias1;
  report.bias_term_2 = bias2;
  report.bound_total = variance + bias1 + bias2;
  return report;
}

double dfb_reference_bound(const BoundInputs& inputs) {
  if (inputs.n < 1) throw std::invalid_argument("reference bound needs n >= 1");
  const ProblemInstance& instance = *inputs.instance;
  const double lambda = inputs.lambda;
  const double n = static_cast<double>(inputs.n);
  const VectorXd diff = inputs.w0 - instance.w_star;
  const double variance =
      inputs.moment.sigma_squared *
      instance.sigma.trace_fn(
          [lambda](double s) { return s * s / ((s + lambda) * (s + lambda)); }) /
      n;
  const double reg_level = lambda + 1.0 / (inputs.eta * n);
  const double bias =
      reg_level * reg_level *
      instance.sigma.quad_form(
          [lambda](double s) { return s / ((s + lambda) * (s + lambda)); }, diff);
  return variance + bias;
}

double additive_bound(const BoundInputs& inputs, const MatrixXd& noise_covariance) {
  const ProblemInstance& instance = *inputs.instance;
  const Index d = instance.dim();
  if (noise_covariance.rows() != d || noise_covariance.cols() != d)
    throw std::invalid_argument("noise covariance has wrong shape");
  const double scale = std::max(1.0, noise_covariance.cwiseAbs().maxCoeff());
  if ((noise_covariance - noise_covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * scale)
    throw std::invalid_argument("invalid noise covariance: not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(noise_covariance);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::invalid_argument("invalid noise covariance: not PSD");
  // With a strictly positive spectrum any PSD V satisfies V <= tau^2 Sigma
  // for finite tau; the stated stepsize condition still applies.
  if (!(inputs.eta <= instance.sigma.top_eigenvalue()))
    throw BoundInapplicableError("additive bound needs eta <= lambda_max(Sigma)");

  const double gamma = inputs.gamma;
  const double lambda = inputs.lambda;
  const double gl = gamma * lambda;
  const double n1 = static_cast<double>(inputs.n + 1);
  const VectorXd diff = inputs.w0 - instance.w_star;

  // tr(Sigma (Sigma+lambda I)^-2 V) on the eigenbasis.
  const MatrixXd v_tilde =
      instance.sigma.has_identity_basis()
          ? noise_covariance
          : MatrixXd(instance.sigma.basis().transpose() * noise_covariance *
                     instance.sigma.basis());
  const VectorXd& s = instance.sigma.eigenvalues();
  double tr_noise = 0.0;
  for (Index i = 0; i < d; ++i)
    tr_noise += s(i) / ((s(i) + lambda) * (s(i) + lambda)) * v_tilde(i, i);

  const double ratio = inputs.eta / gamma;
  const double variance =
      ratio * ratio * (gl / (2.0 - gl) + 2.0 / ((2.0 - gl) * n1)) * tr_noise;
  const double reg_level = lambda + 1.0 / (gamma * n1);
  const double bias =
      reg_level * reg_level *
      instance.sigma.quad_form(
          [lambda](double s_i) { return s_i / ((s_i + lambda) * (s_i + lambda)); },
          diff);
  return variance + bias;
}

VarianceProfile variance_profile(const ProblemInstance& instance, double gamma,
                                 Index n, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (n < 1) throw std::invalid_argument("variance_profile needs n >= 1");
  const double t2 = instance.sigma.trace_fn(
      [lambda](double s) { return s * s / ((s + lambda) * (s + lambda)); });
  const double t3 = instance.sigma.trace_fn([lambda](double s) {
    return s * s / ((s + lambda) * (s + lambda) * (s + lambda));
  });
  const double level = 0.5 * gamma * lambda + 1.0 / static_cast<double>(n);
  VarianceProfile profile;
  profile.f = level * t2;
  profile.f_prime = 0.5 * gamma * t2 - 2.0 * level * t3;
  return profile;
}

std::optional<double> find_lambda_star(const ProblemInstance& instance, double gamma,
                                       Index n) {
  const double d = static_cast<double>(instance.dim());
  const double f_prime_0 =
      0.5 * gamma * d -
      2.0 * instance.sigma.trace_fn([](double s) { return 1.0 / s; }) /
          static_cast<double>(n);
  if (f_prime_0 >= 0.0) return std::nullopt;

  const auto f = [&](double lambda) {
    return variance_profile(instance, gamma, n, lambda).f;
  };
  const double s1 = instance.sigma.top_eigenvalue();
  const double f0 = f(0.0);

  // Coarse log bracket over (0, s1], then golden-section inside the
  // bracketing neighbors of the best grid point.
  constexpr int kGridPoints = 64;
  double best_lambda = 0.0;
  double best_value = f0;
  std::vector<double> grid(kGridPoints + 1);
  for (int i = 0; i <= kGridPoints; ++i)
    grid[i] = s1 * std::pow(10.0, -9.0 * (1.0 - static_cast<double>(i) / kGridPoints));
  for (int i = 0; i <= kGridPoints; ++i) {
    const double value = f(grid[i]);
    if (value < best_value) {
      best_value = value;
      best_lambda = grid[i];
    }
  }
  if (!(best_value < f0)) return std::nullopt;  // f'(0) < 0 makes this unreachable

  double lo = 0.0, hi = s1;
  for (int i = 0; i <= kGridPoints; ++i) {
    if (grid[i] < best_lambda) lo = grid[i];
    if (grid[i] > best_lambda) {
      hi = grid[i];
      break;
    }
  }
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int iter = 0; iter < 200 && (b - a) > 1e-12 * s1; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  double lambda_star = 0.5 * (a + b);
  if (!(f(lambda_star) < f0)) lambda_star = best_lambda;
  return lambda_star;
}

LimitEquivalenceReport verify_limit_equivalence(const ProblemInstance& instance,
                                                double gamma, double lambda,
                                                double tol, Index max_t) {
  const MomentConstants moment = moment_constants(instance);
  if (!(gamma > 0.0) || gamma > 1.0 / moment.b_squared * (1.0 + 1e-12))
    throw std::invalid_argument("verify_limit_equivalence needs gamma <= 1/B^2");
  if (!(gamma * lambda < 1.0))
    throw std::invalid_argument("verify_limit_equivalence needs gamma*lambda < 1");
  if (max_t < 1) throw std::invalid_argument("max_t must be >= 1");

  const double rho = 1.0 - gamma * lambda;
  const double eta = gamma / rho;
  const VectorXd exy = instance.exy();
  const VectorXd ridge = ridge_solution(instance.sigma, exy, lambda);

  VectorXd regularized = VectorXd::Zero(instance.dim());
  VectorXd plain = VectorXd::Zero(instance.dim());
  OnlineGeometricAverage avg(rho, instance.dim());
  avg.update(plain);  // w_0 = 0
  for (Index t = 1; t <= max_t; ++t) {
    regularized += gamma * (exy - instance.sigma.apply(regularized)) -
                   (gamma * lambda) * regularized;
    plain += eta * (exy - instance.sigma.apply(plain));
    avg.update(plain);
  }

  LimitEquivalenceReport report;
  report.tikhonov_residual = (regularized - ridge).norm();
  report.average_residual = (avg.value() - ridge).norm();
  report.iterations = max_t;
  const double worst = std::max(report.tikhonov_residual, report.average_residual);
  if (!(worst <= tol))
    throw ConvergenceError(worst, "limit equivalence did not converge within " +
                                      std::to_string(max_t) + " steps (residual " +
                                      std::to_string(worst) + ")");
  return report;
}

std::vector<FiniteEquivalenceReport> verify_finite_equivalence_series(
    const ProblemInstance& instance, double gamma, double lambda, Index t_max) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(gamma * lambda < 1.0) || lambda < 0.0)
    throw std::invalid_argument("verify_finite_equivalence needs gamma*lambda in [0, 1)");
  if (t_max < 1) throw std::invalid_argument("t must be >= 1");

  const double rho = 1.0 - gamma * lambda;
  const double eta = gamma / rho;
  const double gamma_over_eta = rho;
  const VectorXd exy = instance.exy();
  const Index d = instance.dim();

  VectorXd regularized = VectorXd::Zero(d);  // E[w^_t], stepsize gamma
  VectorXd plain = VectorXd::Zero(d);        // E[w_t], stepsize eta
  OnlineGeometricAverage avg(rho, d);        // eq-geo average of E[w_0..t]
  avg.update(plain);

  detail::NeumaierScalar mass;  // sum_{k=0}^t rho^k
  mass.add(1.0);
  double rho_pow_t1 = rho;  // rho^{t+1}
  double rho_pow_t = 1.0;   // rho^t

  std::vector<FiniteEquivalenceReport> reports;
  reports.reserve(static_cast<std::size_t>(t_max));
  for (Index t = 1; t <= t_max; ++t) {
    regularized += gamma * (exy - instance.sigma.apply(regularized)) -
                   (gamma * lambda) * regularized;
    plain += eta * (exy - instance.sigma.apply(plain));
    avg.update(plain);
    mass.add(rho_pow_t1);
    rho_pow_t *= rho;
    rho_pow_t1 *= rho;

    FiniteEquivalenceReport r;
    r.t = t;
    // Exact identity, validated by brute force: no discount prefactor.
    const VectorXd reconstructed =
        (1.0 - rho_pow_t1) * avg.value() + rho_pow_t1 * plain;
    r.r_exact = (regularized - reconstructed).norm();
    // Printed relation under the truncated normalizer it was derived with
    // (weight mass summed from k = 1).
    const double truncated_mass = mass.value() - 1.0;
    const VectorXd weighted_sum = mass.value() * avg.value();
    const VectorXd printed =
        gamma_over_eta * (1.0 - rho_pow_t) * (weighted_sum / truncated_mass);
    r.r_paper = (regularized - printed).norm();
    reports.push_back(std::move(r));
  }
  return reports;
}

FiniteEquivalenceReport verify_finite_equivalence(const ProblemInstance& instance,
                                                  double gamma, double lambda,
                                                  Index t) {
  return verify_finite_equivalence_series(instance, gamma, lambda, t).back();
}

}  // namespace geoavg

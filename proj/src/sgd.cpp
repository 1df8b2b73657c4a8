#include "geoavg/sgd.hpp"

#include <cmath>
#include <stdexcept>

#include "geoavg/errors.hpp"

namespace geoavg {

std::string to_string(SgdMode mode) {
  switch (mode) {
    case SgdMode::plain: return "plain";
    case SgdMode::tikhonov: return "tikhonov";
    case SgdMode::additive_noise_plain: return "additive_noise_plain";
    case SgdMode::additive_noise_reg: return "additive_noise_reg";
  }
  return "unknown";
}

SgdMode sgd_mode_from_string(const std::string& name) {
  if (name == "plain") return SgdMode::plain;
  if (name == "tikhonov") return SgdMode::tikhonov;
  if (name == "additive_noise_plain") return SgdMode::additive_noise_plain;
  if (name == "additive_noise_reg") return SgdMode::additive_noise_reg;
  throw std::invalid_argument("unknown sgd mode: " + name);
}

void SgdConfig::validate(Index dim) const {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (eta * lambda >= 1.0)
    throw std::invalid_argument("lambda must lie in [0, 1/eta)");
  if (w0.size() != 0 && w0.size() != dim)
    throw std::invalid_argument("w0 dimension mismatch");
}

VectorXd SgdConfig::initial_point(Index dim) const {
  return w0.size() == 0 ? VectorXd::Zero(dim).eval() : w0;
}

namespace {

// Both stochastic steps share this form so that the tikhonov mode at
// lambda = 0 is bit-identical to the plain mode: shrink = 1.0 multiplies
// exactly, and the gradient expression is the same code.
inline VectorXd gradient_step(const VectorXd& w, const VectorXd& x, double y,
                              double shrink, double step) {
  const double resid = x.dot(w) - y;
  return shrink * w - (step * resid) * x;
}

}  // namespace

VectorXd sgd_step(const VectorXd& w_prev, const Sample& sample, double eta) {
  if (w_prev.size() != sample.x.size())
    throw std::invalid_argument("sgd_step: dimension mismatch");
  return gradient_step(w_prev, sample.x, sample.y, 1.0, eta);
}

VectorXd tikhonov_sgd_step(const VectorXd& w_prev, const Sample& sample,
                           double gamma, double lambda) {
  if (w_prev.size() != sample.x.size())
    throw std::invalid_argument("tikhonov_sgd_step: dimension mismatch");
  if (gamma * lambda >= 1.0)
    throw std::invalid_argument("tikhonov_sgd_step: gamma*lambda must be < 1");
  return gradient_step(w_prev, sample.x, sample.y, 1.0 - gamma * lambda, gamma);
}

VectorXd additive_noise_step(const VectorXd& w_prev, const Sample& sample,
                             const ProblemInstance& instance, double eta,
                             double lambda) {
  if (w_prev.size() != sample.x.size() || w_prev.size() != instance.dim())
    throw std::invalid_argument("additive_noise_step: dimension mismatch");
  return (1.0 - eta * lambda) * w_prev -
         eta * (instance.sigma.apply(w_prev) - sample.y * sample.x);
}

namespace {

template <typename NextSample>
IterateTrace run_impl(NextSample&& next_sample, Index n, const SgdConfig& config,
                      const ProblemInstance* instance) {
  const bool additive = config.mode == SgdMode::additive_noise_plain ||
                        config.mode == SgdMode::additive_noise_reg;
  if (additive && instance == nullptr)
    throw std::invalid_argument("additive-noise modes need the problem instance");

  IterateTrace trace;
  trace.config = config;

  VectorXd w;
  bool initialized = false;
  const double gamma = config.gamma();
  for (Index t = 1; t <= n; ++t) {
    const Sample s = next_sample();
    if (!initialized) {
      config.validate(s.x.size());
      w = config.initial_point(s.x.size());
      trace.iterates.resize(n + 1, s.x.size());
      trace.iterates.row(0) = w.transpose();
      initialized = true;
    }
    switch (config.mode) {
      case SgdMode::plain:
        w = sgd_step(w, s, config.eta);
        break;
      case SgdMode::tikhonov:
        w = tikhonov_sgd_step(w, s, gamma, config.lambda);
        break;
      case SgdMode::additive_noise_plain:
        w = additive_noise_step(w, s, *instance, config.eta, 0.0);
        break;
      case SgdMode::additive_noise_reg:
        w = additive_noise_step(w, s, *instance, config.eta, config.lambda);
        break;
    }
    if (!w.allFinite())
      throw DivergenceError(t, "iterate diverged at step " + std::to_string(t));
    trace.iterates.row(t) = w.transpose();
  }
  if (!initialized) {  // n == 0: the trace is just w_0
    const Index d = config.w0.size() != 0 ? config.w0.size()
                                          : (instance ? instance->dim() : 0);
    if (d == 0)
      throw std::invalid_argument("cannot infer dimension for an empty run");
    config.validate(d);
    trace.iterates.resize(1, d);
    trace.iterates.row(0) = config.initial_point(d).transpose();
  }
  return trace;
}

}  // namespace

IterateTrace run(const Dataset& stream, const SgdConfig& config,
                 const ProblemInstance* instance) {
  std::size_t i = 0;
  IterateTrace trace = run_impl(
      [&]() { return stream.samples[i++]; }, stream.size(), config, instance);
  trace.instance_ref = stream.source;
  return trace;
}

IterateTrace run(SampleStream& stream, Index n, const SgdConfig& config,
                 const ProblemInstance* instance) {
  return run_impl([&]() { return stream.next(); }, n, config, instance);
}

namespace {

struct ExpectedRecursion {
  double shrink;        // coefficient on the previous iterate beyond -step*Sigma
  double step;          // stepsize multiplying Sigma and E[xy]
};

ExpectedRecursion expected_recursion(const SgdConfig& config) {
  switch (config.mode) {
    case SgdMode::plain:
    case SgdMode::additive_noise_plain:
      return {1.0, config.eta};
    case SgdMode::tikhonov: {
      const double gamma = config.gamma();
      return {1.0 - gamma * config.lambda, gamma};
    }
    case SgdMode::additive_noise_reg:
      return {1.0 - config.eta * config.lambda, config.eta};
  }
  return {1.0, config.eta};
}

}  // namespace

VectorXd expected_iterate(Index t, const ProblemInstance& instance,
                          const SgdConfig& config) {
  if (t < 0) throw std::invalid_argument("expected_iterate: t must be >= 0");
  config.validate(instance.dim());
  const auto [shrink, step] = expected_recursion(config);
  const VectorXd drift = step * instance.exy();
  VectorXd w = config.initial_point(instance.dim());
  for (Index k = 0; k < t; ++k)
    w = shrink * w - step * instance.sigma.apply(w) + drift;
  return w;
}

IterateTrace expected_trace(Index n, const ProblemInstance& instance,
                            const SgdConfig& config) {
  if (n < 0) throw std::invalid_argument("expected_trace: n must be >= 0");
  config.validate(instance.dim());
  const auto [shrink, step] = expected_recursion(config);
  const VectorXd drift = step * instance.exy();
  IterateTrace trace;
  trace.config = config;
  trace.instance_ref = "expected";
  trace.iterates.resize(n + 1, instance.dim());
  VectorXd w = config.initial_point(instance.dim());
  trace.iterates.row(0) = w.transpose();
  for (Index t = 1; t <= n; ++t) {
    w = shrink * w - step * instance.sigma.apply(w) + drift;
    trace.iterates.row(t) = w.transpose();
  }
  return trace;
}

}  // namespace geoavg

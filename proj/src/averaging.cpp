#include "geoavg/averaging.hpp"

#include <cmath>
#include <stdexcept>

#include "geoavg/detail/accumulators.hpp"
#include "geoavg/errors.hpp"

namespace geoavg {

std::string to_string(AveragingScheme::Kind kind) {
  switch (kind) {
    case AveragingScheme::Kind::uniform: return "uniform";
    case AveragingScheme::Kind::geometric: return "geometric";
    case AveragingScheme::Kind::tail: return "tail";
  }
  return "unknown";
}

double AveragingScheme::discount_from_eta(double eta, double lambda) {
  const double rho = 1.0 - eta * lambda;
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("eta*lambda must lie in [0, 1)");
  return rho;
}

double AveragingScheme::discount_from_gamma(double gamma, double lambda) {
  const double rho = 1.0 - gamma * lambda;
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("gamma*lambda must lie in [0, 1)");
  return rho;
}

void AveragingScheme::validate(Index trace_length) const {
  if (trace_length < 1) throw std::invalid_argument("empty trace");
  switch (kind) {
    case Kind::uniform:
      break;
    case Kind::geometric:
      if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("geometric discount must lie in (0, 1]");
      break;
    case Kind::tail:
      if (tau < 0 || tau >= trace_length)
        throw std::out_of_range("tail start index out of range");
      break;
  }
}

namespace {

VectorXd block_weighted_mean(const Eigen::Ref<const IterateMatrix>& iterates, Index begin,
                             Index end, double rho) {
  detail::BlockGeometricAccumulator acc(rho, iterates.cols());
  for (Index t = begin; t < end; ++t) acc.add(iterates.row(t).data());
  return acc.value();
}

}  // namespace

VectorXd average(const Eigen::Ref<const IterateMatrix>& iterates,
                 const AveragingScheme& scheme) {
  scheme.validate(iterates.rows());
  switch (scheme.kind) {
    case AveragingScheme::Kind::uniform:
      return block_weighted_mean(iterates, 0, iterates.rows(), 1.0);
    case AveragingScheme::Kind::geometric:
      return block_weighted_mean(iterates, 0, iterates.rows(), scheme.rho);
    case AveragingScheme::Kind::tail:
      return block_weighted_mean(iterates, scheme.tau, iterates.rows(), 1.0);
  }
  throw std::logic_error("unreachable");
}

VectorXd average(const IterateTrace& trace, const AveragingScheme& scheme) {
  return average(trace.iterates, scheme);
}

OnlineGeometricAverage::OnlineGeometricAverage(double rho, Index dim)
    : rho_(rho), value_(VectorXd::Zero(dim)) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("geometric discount must lie in (0, 1]");
}

void OnlineGeometricAverage::update(const VectorXd& w) {
  if (w.size() != value_.size())
    throw std::invalid_argument("online update: dimension mismatch");
  if (count_ == 0) {
    value_ = w;
    blend_ = 1.0;
  } else {
    blend_ = rho_ * blend_ / (1.0 + rho_ * blend_);
    value_ += blend_ * (w - value_);
  }
  ++count_;
}

OnlineAverageState online_update(OnlineAverageState state, const VectorXd& w_t,
                                 double rho) {
  if (state.step < 0) {
    state.current = w_t;
    state.blend = 1.0;
    state.step = 0;
    return state;
  }
  state.blend = rho * state.blend / (1.0 + rho * state.blend);
  state.current += state.blend * (w_t - state.current);
  ++state.step;
  return state;
}

double normalizer_c(Index n, double gamma_lambda) {
  if (n < 0) throw std::invalid_argument("normalizer_c: n must be >= 0");
  if (!(gamma_lambda >= 0.0 && gamma_lambda < 1.0))
    throw std::out_of_range("gamma*lambda must lie in [0, 1)");
  if (gamma_lambda == 0.0) return 1.0 / static_cast<double>(n + 1);
  // 1 - (1-gl)^{n+1} without cancellation for small gl.
  const double denom =
      -std::expm1(static_cast<double>(n + 1) * std::log1p(-gamma_lambda));
  return gamma_lambda / denom;
}

std::pair<double, double> c_bounds(Index n, double gamma_lambda) {
  if (n < 1) throw std::invalid_argument("c_bounds: n must be >= 1");
  if (!(gamma_lambda > 0.0 && gamma_lambda < 1.0))
    throw std::out_of_range("gamma*lambda must lie in (0, 1)");
  const double inv = 1.0 / static_cast<double>(n + 1);
  const double bound1 = (gamma_lambda + inv) * (gamma_lambda + inv);
  const double bound2 =
      gamma_lambda / (2.0 - gamma_lambda) + 2.0 * inv / (2.0 - gamma_lambda);
  return {bound1, bound2};
}

PartialGeometricSum partial_geometric_sum(const Eigen::Ref<const IterateMatrix>& iterates,
                                          Index begin, Index end, double rho) {
  if (begin < 0 || end > iterates.rows() || begin >= end)
    throw std::invalid_argument("partial_geometric_sum: bad batch range");
  detail::BlockState state(iterates.cols());
  for (Index t = begin; t < end; ++t)
    state.add(iterates.row(t).data(), iterates.cols(), rho);
  PartialGeometricSum partial;
  partial.weighted_sum = state.sum.value();
  partial.weight_mass = state.mass.value();
  partial.offset = begin;
  partial.count = state.count;
  return partial;
}

VectorXd parallel_geometric_combine(const std::vector<PartialGeometricSum>& partials,
                                    double rho) {
  if (partials.empty()) throw PartitionError("no partial sums to combine");
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("geometric discount must lie in (0, 1]");
  const Index dim = partials.front().weighted_sum.size();
  Index expected_offset = 0;
  for (const auto& partial : partials) {
    if (partial.weighted_sum.size() != dim)
      throw PartitionError("partial sums disagree on dimension");
    if (partial.count < 1) throw PartitionError("empty batch in partition");
    if (partial.offset != expected_offset)
      throw PartitionError("batches must cover the trace contiguously and in order");
    expected_offset += partial.count;
  }
  detail::CombineState combine(dim);
  for (const auto& partial : partials)
    combine.add(partial.weighted_sum, partial.weight_mass, partial.offset, rho);
  return combine.value();
}

VectorXd geometric_stopping_sample(const IterateTrace& trace, double gamma_lambda,
                                   Rng& rng) {
  if (!(gamma_lambda > 0.0 && gamma_lambda < 1.0))
    throw std::invalid_argument("gamma*lambda must lie in (0, 1)");
  if (trace.length() < 1) throw std::invalid_argument("empty trace");
  const long required =
      static_cast<long>(std::ceil(std::log(1e-8) / std::log1p(-gamma_lambda)));
  if (trace.length() < required)
    throw TruncationError(
        required, "trace too short for the stopping distribution: need length >= " +
                      std::to_string(required) + ", have " +
                      std::to_string(trace.length()));
  long g = rng.geometric(gamma_lambda);
  const long n = trace.length() - 1;
  if (g > n) g = n;  // tail mass below 1e-8 by the precondition
  return trace.iterate(g);
}

}  // namespace geoavg

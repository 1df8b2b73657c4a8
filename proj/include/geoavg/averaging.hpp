#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geoavg/rng.hpp"
#include "geoavg/sgd.hpp"

namespace geoavg {

/// A weighting over the iterates w_0..w_n of a trace.
///
/// * uniform    - the Polyak-Ruppert average, weight 1/(n+1) each.
/// * geometric  - weight proportional to rho^t, rho = 1 - gamma lambda in
///                (0, 1]; early iterates weigh more. rho = 1 recovers uniform.
/// * tail       - uniform over the last n - tau + 1 iterates w_tau..w_n.
struct AveragingScheme {
  enum class Kind { uniform, geometric, tail };

  Kind kind = Kind::uniform;
  double rho = 1.0;  // geometric only
  Index tau = 0;     // tail only

  static AveragingScheme uniform() { return {Kind::uniform, 1.0, 0}; }
  static AveragingScheme geometric(double rho) { return {Kind::geometric, rho, 0}; }
  static AveragingScheme tail(Index tau) { return {Kind::tail, 1.0, tau}; }

  /// Discount from the (eta, lambda) parameterization: rho = 1 - eta lambda.
  static double discount_from_eta(double eta, double lambda);
  /// Discount from the (gamma, lambda) parameterization: rho = 1 - gamma lambda.
  /// All bound/theorem verification uses this convention.
  static double discount_from_gamma(double gamma, double lambda);

  void validate(Index trace_length) const;
};

std::string to_string(AveragingScheme::Kind kind);

/// Weighted average of the trace under the scheme. The geometric sum runs in
/// descending-weight order with compensated summation, in fixed-size blocks
/// combined in order; the identical block arithmetic backs the serial and the
/// parallel path computations, so they agree bitwise.
VectorXd average(const Eigen::Ref<const IterateMatrix>& iterates,
                 const AveragingScheme& scheme);
VectorXd average(const IterateTrace& trace, const AveragingScheme& scheme);

/// Streaming geometric average. After updates with w_0..w_t the value equals
/// the batch average with weights rho^k, maintained through the blend
///
///   a_0 = 1,   a_t = rho a_{t-1} / (1 + rho a_{t-1}),
///   value <- (1 - a_t) value + a_t w_t,
///
/// which never materializes rho^t and so cannot underflow for long runs.
/// rho = 1 gives a_t = 1/(t+1), the running arithmetic mean.
class OnlineGeometricAverage {
 public:
  OnlineGeometricAverage(double rho, Index dim);

  void update(const VectorXd& w);
  const VectorXd& value() const { return value_; }
  double blend() const { return blend_; }
  Index count() const { return count_; }  // number of updates seen

 private:
  double rho_;
  VectorXd value_;
  double blend_ = 1.0;
  Index count_ = 0;
};

/// Free-function form of the same update; state.step counts applied updates.
struct OnlineAverageState {
  VectorXd current;
  double blend = 1.0;
  Index step = -1;  // index of the last absorbed iterate
};
OnlineAverageState online_update(OnlineAverageState state, const VectorXd& w_t,
                                 double rho);

/// c_n = (sum_{t=0}^n (1-gamma lambda)^t)^-1
///     = gamma lambda / (1 - (1-gamma lambda)^{n+1}), and 1/(n+1) at
/// gamma lambda = 0. Requires gamma lambda in [0, 1).
double normalizer_c(Index n, double gamma_lambda);

/// Right-hand sides bounding c_n^2 and c_n^2 sum_{t=1}^n rho^{2t}:
///   bound1 = (gamma lambda + 1/(n+1))^2
///   bound2 = gamma lambda/(2-gamma lambda) + 2/((2-gamma lambda)(n+1))
/// Requires n >= 1 and gamma lambda in (0, 1).
std::pair<double, double> c_bounds(Index n, double gamma_lambda);

/// Geometric partial sum over one contiguous batch of iterates, with weights
/// rho^{t-offset} local to the batch. Batches combine across processes or
/// threads through parallel_geometric_combine.
struct PartialGeometricSum {
  VectorXd weighted_sum;   // sum_{t in batch} rho^{t-offset} w_t
  double weight_mass = 0;  // sum_{t in batch} rho^{t-offset}
  Index offset = 0;        // global index of the first iterate in the batch
  Index count = 0;         // number of iterates in the batch
};

PartialGeometricSum partial_geometric_sum(const Eigen::Ref<const IterateMatrix>& iterates,
                                          Index begin, Index end, double rho);

/// (sum_k rho^{offset_k} ws_k) / (sum_k rho^{offset_k} mass_k). Partials must
/// cover 0..n contiguously, disjointly, in order, else PartitionError. The
/// reduction order is fixed, so the result is reproducible.
VectorXd parallel_geometric_combine(const std::vector<PartialGeometricSum>& partials,
                                    double rho);

/// Samples G with P(G = k) = gamma lambda (1-gamma lambda)^k on k = 0,1,2,...
/// and returns w_G: geometric averaging read as probabilistic early stopping.
/// Requires the trace long enough that P(G > n) = rho^{n+1} < 1e-8 (length
/// ceil(ln 1e-8 / ln rho) suffices), else TruncationError stating the required
/// length. The residual tail mass is clamped to the last iterate.
VectorXd geometric_stopping_sample(const IterateTrace& trace, double gamma_lambda,
                                   Rng& rng);

}  // namespace geoavg

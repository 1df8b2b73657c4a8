#pragma once

#include <string>

#include "geoavg/problem.hpp"

namespace geoavg {

enum class SgdMode { plain, tikhonov, additive_noise_plain, additive_noise_reg };

std::string to_string(SgdMode mode);
SgdMode sgd_mode_from_string(const std::string& name);

struct SgdConfig {
  double eta = 0.0;          // stepsize of the plain recursion
  double lambda = 0.0;       // regularization level, in [0, 1/eta)
  SgdMode mode = SgdMode::plain;
  VectorXd w0;               // empty means the zero vector

  /// Conjugate stepsize gamma = eta / (1 + eta lambda), so that
  /// eta = gamma / (1 - gamma lambda). The Tikhonov recursion steps with it.
  double gamma() const { return eta / (1.0 + eta * lambda); }

  void validate(Index dim) const;
  VectorXd initial_point(Index dim) const;
};

/// Iterates are stored one per row and consumed row-wise, so the matrix is
/// row-major.
using IterateMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// All iterates w_0..w_n of one run, one per row. Keeping every iterate is the
/// point: regularization paths are recomputed offline from this storage.
struct IterateTrace {
  IterateMatrix iterates;  // (n+1) x d
  SgdConfig config;
  std::string instance_ref;

  Index length() const { return iterates.rows(); }  // n+1
  Index dim() const { return iterates.cols(); }
  VectorXd iterate(Index t) const { return iterates.row(t).transpose(); }
};

/// w - eta (x <x,w> - x y)
VectorXd sgd_step(const VectorXd& w_prev, const Sample& sample, double eta);

/// w - gamma (x <x,w> - x y + lambda w); requires gamma lambda < 1.
VectorXd tikhonov_sgd_step(const VectorXd& w_prev, const Sample& sample,
                           double gamma, double lambda);

/// w - eta (Sigma w - x y + lambda w), with the true Sigma supplied by the
/// instance; lambda = 0 gives the unregularized additive-noise recursion.
VectorXd additive_noise_step(const VectorXd& w_prev, const Sample& sample,
                             const ProblemInstance& instance, double eta,
                             double lambda);

/// Runs the recursion selected by config.mode over the dataset, recording
/// every iterate. Additive modes need `instance` for the true Sigma.
/// Throws DivergenceError with the step index on a non-finite iterate.
IterateTrace run(const Dataset& stream, const SgdConfig& config,
                 const ProblemInstance* instance = nullptr);

/// Same, drawing n samples from a live stream.
IterateTrace run(SampleStream& stream, Index n, const SgdConfig& config,
                 const ProblemInstance* instance = nullptr);

/// Deterministic expected iterate E[w_t] under the config's mode, iterating
/// E[w_t] = (I - eta Sigma) E[w_{t-1}] + eta E[xy]            (plain, additive)
/// E[w_t] = (I - gamma Sigma - gamma lambda I) E[w_{t-1}] + gamma E[xy]
///                                                            (tikhonov)
VectorXd expected_iterate(Index t, const ProblemInstance& instance,
                          const SgdConfig& config);

/// Whole expected trace E[w_0]..E[w_n] in one sweep.
IterateTrace expected_trace(Index n, const ProblemInstance& instance,
                            const SgdConfig& config);

}  // namespace geoavg

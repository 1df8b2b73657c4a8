#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoavg/rng.hpp"

namespace geoavg {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = Eigen::Index;

enum class CovariateLaw { gaussian, scaled_rademacher };

std::string to_string(CovariateLaw law);
CovariateLaw covariate_law_from_string(const std::string& name);

/// Covariance stored as spectrum plus orthonormal basis, Sigma = B diag(s) B^T.
/// Functions of Sigma ((Sigma + lambda I)^-1, square roots, traces) are
/// evaluated exactly on the eigenvalues, so no iterative solve appears
/// anywhere downstream.
class SpectralCovariance {
 public:
  /// Eigenvalues must be nonnegative; basis columns orthonormal to 1e-12.
  SpectralCovariance(VectorXd spectrum, MatrixXd basis);

  /// Identity basis.
  explicit SpectralCovariance(VectorXd spectrum);

  Index dim() const { return spectrum_.size(); }
  const VectorXd& eigenvalues() const { return spectrum_; }
  const MatrixXd& basis() const { return basis_; }
  bool has_identity_basis() const { return identity_basis_; }

  double trace() const { return spectrum_.sum(); }
  double top_eigenvalue() const { return spectrum_.maxCoeff(); }
  double min_eigenvalue() const { return spectrum_.minCoeff(); }

  VectorXd apply(const VectorXd& v) const;  // Sigma v
  MatrixXd dense() const;

  VectorXd to_eigenbasis(const VectorXd& v) const;    // B^T v
  VectorXd from_eigenbasis(const VectorXd& c) const;  // B c

  /// sum_i f(s_i)
  template <typename F>
  double trace_fn(F&& f) const {
    double acc = 0.0;
    for (Index i = 0; i < spectrum_.size(); ++i) acc += f(spectrum_(i));
    return acc;
  }

  /// v^T f(Sigma) v
  template <typename F>
  double quad_form(F&& f, const VectorXd& v) const {
    const VectorXd c = to_eigenbasis(v);
    double acc = 0.0;
    for (Index i = 0; i < c.size(); ++i) acc += f(spectrum_(i)) * c(i) * c(i);
    return acc;
  }

  /// f(Sigma) v
  template <typename F>
  VectorXd apply_fn(F&& f, const VectorXd& v) const {
    VectorXd c = to_eigenbasis(v);
    for (Index i = 0; i < c.size(); ++i) c(i) *= f(spectrum_(i));
    return from_eigenbasis(c);
  }

 private:
  VectorXd spectrum_;
  MatrixXd basis_;
  bool identity_basis_;
};

/// The population least-squares problem: covariance, optimum, noise level.
struct ProblemInstance {
  SpectralCovariance sigma;
  VectorXd w_star;
  double noise_sigma = 0.0;
  CovariateLaw covariate_law = CovariateLaw::gaussian;
  std::optional<std::uint64_t> basis_seed;  // recorded for serialization

  Index dim() const { return sigma.dim(); }
  VectorXd exy() const { return sigma.apply(w_star); }  // E[xy] = Sigma w*
};

/// Constants of the moment assumptions: E[|x|^2 x (x) x] <= R^2 Sigma,
/// Sigma <= B^2 I, E[eps^2 x (x) x] <= sigma^2 Sigma.
struct MomentConstants {
  double r_squared = 0.0;
  double b_squared = 0.0;
  double sigma_squared = 0.0;
};

struct Sample {
  VectorXd x;
  double y = 0.0;
};

struct Dataset {
  std::vector<Sample> samples;
  std::string source;

  bool empty() const { return samples.empty(); }
  Index size() const { return static_cast<Index>(samples.size()); }
  Index dim() const { return samples.empty() ? 0 : samples.front().x.size(); }
};

/// Spectrum must be strictly positive and sorted descending. A reproducible
/// random orthonormal basis is drawn when `basis_seed` is given; identity
/// basis otherwise.
ProblemInstance make_instance(Index dim, VectorXd spectrum, VectorXd w_star,
                              double noise_sigma,
                              CovariateLaw law = CovariateLaw::gaussian,
                              std::optional<std::uint64_t> basis_seed = std::nullopt);

/// Gaussian covariates: R^2 = trace(Sigma) + 2 s_1 (exact fourth-moment
/// identity E[|x|^2 x (x) x] = trace(Sigma) Sigma + 2 Sigma^2), B^2 = s_1.
/// Scaled Rademacher: R^2 = trace(Sigma) with equality in the assumption.
MomentConstants moment_constants(const ProblemInstance& instance);

/// Deterministic i.i.d. sample generator: x from the covariate law with
/// covariance Sigma, y = <w*, x> + eps with eps ~ N(0, sigma^2).
class SampleStream {
 public:
  SampleStream(const ProblemInstance& instance, std::uint64_t seed);
  Sample next();

 private:
  const ProblemInstance* instance_;
  VectorXd scale_;  // sqrt of spectrum
  Rng rng_;
};

Dataset sample_stream(const ProblemInstance& instance, Index n, std::uint64_t seed);

/// CSV rows are d feature columns followed by one label column; optional
/// header; "." decimal, no quoting.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& dataset, const std::string& path);

/// (Sigma_hat, exy_hat) = ((1/n) sum x x^T, (1/n) sum x y).
std::pair<MatrixXd, VectorXd> empirical_moments(const Dataset& dataset);

/// Closed-form V = E[xi (x) xi] of the additive-noise vector xi = x y - E[xy],
/// in the original coordinates.
MatrixXd additive_noise_covariance(const ProblemInstance& instance);

}  // namespace geoavg

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace geoavg::detail {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Iterates per block; fixed so the partition never depends on worker count.
inline constexpr Index kAveragingBlockSize = 4096;

struct NeumaierScalar {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

/// Per-coordinate Neumaier accumulation.
class NeumaierVector {
 public:
  explicit NeumaierVector(Index dim)
      : sum_(VectorXd::Zero(dim)), comp_(VectorXd::Zero(dim)) {}

  void add_scaled(double scale, const double* row, Index dim) {
    for (Index i = 0; i < dim; ++i) {
      const double v = scale * row[i];
      const double t = sum_(i) + v;
      if (std::abs(sum_(i)) >= std::abs(v))
        comp_(i) += (sum_(i) - t) + v;
      else
        comp_(i) += (v - t) + sum_(i);
      sum_(i) = t;
    }
  }

  VectorXd value() const { return sum_ + comp_; }

 private:
  VectorXd sum_;
  VectorXd comp_;
};

/// One contiguous batch of geometrically weighted iterates, weights local to
/// the batch (rho^0 for its first row). Rows arrive in ascending index order,
/// which is descending weight order.
struct BlockState {
  NeumaierVector sum;
  NeumaierScalar mass;
  double weight = 1.0;
  Index count = 0;

  explicit BlockState(Index dim) : sum(dim) {}

  void add(const double* row, Index dim, double rho) {
    if (weight != 0.0) {  // weights below the double range contribute nothing
      sum.add_scaled(weight, row, dim);
      mass.add(weight);
    }
    weight *= rho;
    ++count;
  }
};

/// Ordered reduction of block results scaled by rho^offset. The association
/// order is fixed, so a given block partition always reproduces bitwise.
class CombineState {
 public:
  explicit CombineState(Index dim) : numer_(dim) {}

  void add(const VectorXd& weighted_sum, double weight_mass, Index offset, double rho) {
    const double scale = std::pow(rho, static_cast<double>(offset));
    numer_.add_scaled(scale, weighted_sum.data(), weighted_sum.size());
    denom_.add(scale * weight_mass);
  }

  VectorXd value() const {
    const double mass = denom_.value();
    if (!(mass > 0.0)) throw std::invalid_argument("zero total weight mass");
    return numer_.value() / mass;
  }

 private:
  NeumaierVector numer_;
  NeumaierScalar denom_;
};

/// The canonical geometric-average arithmetic: rows stream in, fixed-size
/// blocks flush into an ordered combine. Batch averaging, the single-scan
/// regularization path, and the parallel path all run exactly this sequence
/// of operations, so their results agree bitwise.
class BlockGeometricAccumulator {
 public:
  BlockGeometricAccumulator(double rho, Index dim)
      : rho_(rho), dim_(dim), block_(dim), combine_(dim) {}

  void add(const double* row) {
    block_.add(row, dim_, rho_);
    if (block_.count == kAveragingBlockSize) flush();
  }

  Index count() const { return total_ + block_.count; }

  VectorXd value() {
    flush();
    if (total_ == 0) throw std::invalid_argument("empty trace");
    return combine_.value();
  }

 private:
  void flush() {
    if (block_.count == 0) return;
    combine_.add(block_.sum.value(), block_.mass.value(), total_, rho_);
    total_ += block_.count;
    block_ = BlockState(dim_);
  }

  double rho_;
  Index dim_;
  BlockState block_;
  CombineState combine_;
  Index total_ = 0;
};

}  // namespace geoavg::detail

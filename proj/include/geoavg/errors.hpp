#pragma once

#include <stdexcept>
#include <string>

namespace geoavg {

/// An SGD iterate became non-finite. Carries the index of the offending step.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// A deterministic recursion did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double residual, const std::string& what)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Bound preconditions do not hold; evaluating the bound would be meaningless.
class BoundInapplicableError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `row` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(long row, const std::string& what)
      : std::runtime_error(what), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

class EmptyDatasetError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Partial sums do not form a contiguous, disjoint, ordered cover of a trace.
class PartitionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Trace too short for the requested stopping distribution.
class TruncationError : public std::invalid_argument {
 public:
  TruncationError(long required_length, const std::string& what)
      : std::invalid_argument(what), required_(required_length) {}
  long required_length() const noexcept { return required_; }

 private:
  long required_;
};

}  // namespace geoavg

#include "geoavg/regpath.hpp"

#include <algorithm>
#include <stdexcept>

#include "geoavg/detail/accumulators.hpp"
#include "geoavg/errors.hpp"
#include "geoavg/parallel.hpp"

namespace geoavg {

std::string to_string(PathKeyKind kind) {
  return kind == PathKeyKind::lambda ? "lambda" : "tau";
}

namespace {

void validate_lambda_grid(double gamma, const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  double prev = -1.0;
  for (const double lambda : lambda_grid) {
    if (lambda < 0.0) throw std::out_of_range("lambda grid must be nonnegative");
    if (!(gamma * lambda < 1.0))
      throw std::out_of_range("lambda grid violates gamma*lambda < 1");
    if (lambda < prev)
      throw std::invalid_argument("lambda grid must be sorted ascending");
    prev = lambda;
  }
}

}  // namespace

std::vector<PathPoint> geometric_path(const IterateTrace& trace, double gamma,
                                      const std::vector<double>& lambda_grid) {
  validate_lambda_grid(gamma, lambda_grid);
  if (trace.length() < 1) throw std::invalid_argument("empty trace");

  // One accumulator per lambda, filled in a single pass over the stored trace.
  std::vector<detail::BlockGeometricAccumulator> accumulators;
  accumulators.reserve(lambda_grid.size());
  for (const double lambda : lambda_grid)
    accumulators.emplace_back(1.0 - gamma * lambda, trace.dim());

  for (Index t = 0; t < trace.length(); ++t) {
    const double* row = trace.iterates.row(t).data();
    for (auto& acc : accumulators) acc.add(row);
  }

  std::vector<PathPoint> path(lambda_grid.size());
  for (std::size_t j = 0; j < lambda_grid.size(); ++j)
    path[j] = {lambda_grid[j], accumulators[j].value()};
  return path;
}

std::vector<PathPoint> tail_path(const IterateTrace& trace,
                                 const std::vector<Index>& tau_grid) {
  if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
  if (trace.length() < 1) throw std::invalid_argument("empty trace");
  const Index n = trace.length() - 1;
  for (const Index tau : tau_grid)
    if (tau < 0 || tau > n) throw std::out_of_range("tau out of range [0, n]");

  std::vector<PathPoint> path(tau_grid.size());
  for (std::size_t j = 0; j < tau_grid.size(); ++j) {
    path[j].key = static_cast<double>(tau_grid[j]);
    path[j].solution =
        average(trace.iterates, AveragingScheme::tail(tau_grid[j]));
  }
  return path;
}

PathResult select(PathKeyKind kind, const std::vector<PathPoint>& path_entries,
                  const Dataset& validation, const std::string& trace_id) {
  if (path_entries.empty()) throw std::invalid_argument("empty path");
  if (validation.empty()) throw EmptyDatasetError("empty validation set");
  const Index d = path_entries.front().solution.size();
  if (validation.dim() != d)
    throw std::invalid_argument("validation set dimension mismatch");

  PathResult result;
  result.kind = kind;
  result.trace_id = trace_id;
  result.entries.reserve(path_entries.size());
  for (const auto& point : path_entries) {
    double err = 0.0;
    for (const Sample& s : validation.samples) {
      const double resid = point.solution.dot(s.x) - s.y;
      err += resid * resid;
    }
    err /= static_cast<double>(validation.size());
    result.entries.push_back({point.key, point.solution, err});
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < result.entries.size(); ++j) {
    const auto& candidate = result.entries[j];
    const auto& incumbent = result.entries[best];
    // Ties go to the larger key: the more regularized solution.
    if (candidate.validation_error < incumbent.validation_error ||
        (candidate.validation_error == incumbent.validation_error &&
         candidate.key > incumbent.key))
      best = j;
  }
  result.selected_index = best;
  return result;
}

std::vector<PathPoint> parallel_path(const IterateTrace& trace, double gamma,
                                     const std::vector<double>& lambda_grid,
                                     int workers) {
  validate_lambda_grid(gamma, lambda_grid);
  if (trace.length() < 1) throw std::invalid_argument("empty trace");

  // Fixed-size blocks, independent of the worker count: workers only bound
  // concurrency, so the partials and their ordered combine are identical for
  // any --workers, and identical to the serial single-scan path.
  const Index n_rows = trace.length();
  const Index n_blocks =
      (n_rows + detail::kAveragingBlockSize - 1) / detail::kAveragingBlockSize;
  const std::size_t n_lambdas = lambda_grid.size();

  std::vector<std::vector<PartialGeometricSum>> partials(
      n_lambdas, std::vector<PartialGeometricSum>(n_blocks));
  parallel_for(n_blocks, workers, [&](Index b) {
    const Index begin = b * detail::kAveragingBlockSize;
    const Index end = std::min(begin + detail::kAveragingBlockSize, n_rows);
    for (std::size_t j = 0; j < n_lambdas; ++j) {
      const double rho = 1.0 - gamma * lambda_grid[j];
      partials[j][b] = partial_geometric_sum(trace.iterates, begin, end, rho);
    }
  });

  std::vector<PathPoint> path(n_lambdas);
  for (std::size_t j = 0; j < n_lambdas; ++j) {
    const double rho = 1.0 - gamma * lambda_grid[j];
    path[j] = {lambda_grid[j], parallel_geometric_combine(partials[j], rho)};
  }
  return path;
}

}  // namespace geoavg

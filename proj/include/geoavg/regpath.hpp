#pragma once

#include <string>
#include <vector>

#include "geoavg/averaging.hpp"
#include "geoavg/sgd.hpp"

namespace geoavg {

enum class PathKeyKind { lambda, tau };

std::string to_string(PathKeyKind kind);

struct PathPoint {
  double key = 0.0;  // lambda or tau
  VectorXd solution;
};

struct PathEntry {
  double key = 0.0;
  VectorXd solution;
  double validation_error = 0.0;
};

struct PathResult {
  PathKeyKind kind = PathKeyKind::lambda;
  std::vector<PathEntry> entries;
  std::size_t selected_index = 0;
  std::string trace_id;
};

/// One geometric average per lambda, all from a single scan of the stored
/// trace (one block accumulator per lambda). Discounts are rho = 1 - gamma
/// lambda; the lambda = 0 entry is the uniform average. Grid must be sorted
/// ascending with gamma lambda < 1 throughout.
std::vector<PathPoint> geometric_path(const IterateTrace& trace, double gamma,
                                      const std::vector<double>& lambda_grid);

/// Suffix means w_tau..w_n per tau. Grid values must lie in [0, n].
std::vector<PathPoint> tail_path(const IterateTrace& trace,
                                 const std::vector<Index>& tau_grid);

/// Mean squared prediction error of each entry on the validation set; selects
/// the minimizer, breaking ties toward the larger key (stronger
/// regularization). Invariant under reordering of the entries.
PathResult select(PathKeyKind kind, const std::vector<PathPoint>& path_entries,
                  const Dataset& validation, const std::string& trace_id = {});

/// geometric_path computed from fixed-size trace blocks evaluated
/// concurrently. The block partition does not depend on `workers` (which only
/// bounds concurrency), so results are byte-identical across worker counts
/// and match the serial path bitwise.
std::vector<PathPoint> parallel_path(const IterateTrace& trace, double gamma,
                                     const std::vector<double>& lambda_grid,
                                     int workers);

}  // namespace geoavg

#pragma once

#include <cstdint>
#include <vector>

#include "geoavg/averaging.hpp"
#include "geoavg/problem.hpp"
#include "geoavg/sgd.hpp"

namespace geoavg {

struct McRiskEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  Index reps = 0;
};

/// Monte Carlo estimate of E[excess risk] of the averaged iterate: `reps`
/// independent runs of n SGD steps, one scheme applied per run. Replicate r
/// draws its stream from derive_seed(master_seed, r), so results do not
/// depend on the worker count.
McRiskEstimate mc_excess_risk(const ProblemInstance& instance,
                              const SgdConfig& config,
                              const AveragingScheme& scheme, Index n, Index reps,
                              std::uint64_t master_seed, int workers = 0);

/// Same replicate streams evaluated under several schemes at once (common
/// random numbers), so scheme differences are not masked by stream noise.
std::vector<McRiskEstimate> mc_excess_risk_multi(
    const ProblemInstance& instance, const SgdConfig& config,
    const std::vector<AveragingScheme>& schemes, Index n, Index reps,
    std::uint64_t master_seed, int workers = 0);

}  // namespace geoavg

#include "geoavg/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include "geoavg/detail/accumulators.hpp"
#include "geoavg/parallel.hpp"
#include "geoavg/risk.hpp"
#include "geoavg/rng.hpp"

namespace geoavg {

namespace {

McRiskEstimate summarize(const std::vector<double>& values, Index scheme,
                         Index n_schemes) {
  detail::NeumaierScalar sum;
  const Index reps = static_cast<Index>(values.size()) / n_schemes;
  for (Index r = 0; r < reps; ++r) sum.add(values[r * n_schemes + scheme]);
  const double mean = sum.value() / static_cast<double>(reps);
  double var = 0.0;
  for (Index r = 0; r < reps; ++r) {
    const double diff = values[r * n_schemes + scheme] - mean;
    var += diff * diff;
  }
  McRiskEstimate estimate;
  estimate.mean = mean;
  estimate.reps = reps;
  estimate.stderr = reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1) /
                                         static_cast<double>(reps))
                             : 0.0;
  return estimate;
}

}  // namespace

std::vector<McRiskEstimate> mc_excess_risk_multi(
    const ProblemInstance& instance, const SgdConfig& config,
    const std::vector<AveragingScheme>& schemes, Index n, Index reps,
    std::uint64_t master_seed, int workers) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("no averaging schemes given");
  config.validate(instance.dim());

  const Index n_schemes = static_cast<Index>(schemes.size());
  std::vector<double> values(static_cast<std::size_t>(reps * n_schemes));
  parallel_for(reps, workers, [&](Index rep) {
    SampleStream stream(instance, derive_seed(master_seed, rep));
    const IterateTrace trace = run(stream, n, config, &instance);
    for (Index j = 0; j < n_schemes; ++j) {
      const VectorXd averaged = average(trace, schemes[j]);
      values[rep * n_schemes + j] = excess_risk(averaged, instance);
    }
  });

  std::vector<McRiskEstimate> estimates;
  estimates.reserve(schemes.size());
  for (Index j = 0; j < n_schemes; ++j)
    estimates.push_back(summarize(values, j, n_schemes));
  return estimates;
}

McRiskEstimate mc_excess_risk(const ProblemInstance& instance,
                              const SgdConfig& config,
                              const AveragingScheme& scheme, Index n, Index reps,
                              std::uint64_t master_seed, int workers) {
  return mc_excess_risk_multi(instance, config, {scheme}, n, reps, master_seed,
                              workers)
      .front();
}

}  // namespace geoavg

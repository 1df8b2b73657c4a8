#pragma once

#include <functional>

#include <Eigen/Dense>

namespace geoavg {

/// Concurrency cap: min(requested, GEOAVG_THREADS, hardware). requested <= 0
/// means "as many as allowed".
int effective_workers(int requested);

/// Runs task(0..n_tasks-1) on up to `workers` threads. Tasks must write to
/// disjoint slots; the first exception thrown by any task is rethrown after
/// all threads join.
void parallel_for(Eigen::Index n_tasks, int workers,
                  const std::function<void(Eigen::Index)>& task);

}  // namespace geoavg

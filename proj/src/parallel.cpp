#include "geoavg/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace geoavg {

int effective_workers(int requested) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("GEOAVG_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1 && parsed < 1024) cap = static_cast<int>(parsed);
  }
  if (requested <= 0) return cap;
  return std::min(requested, cap);
}

void parallel_for(Eigen::Index n_tasks, int workers,
                  const std::function<void(Eigen::Index)>& task) {
  if (n_tasks <= 0) return;
  const int threads = std::min<Eigen::Index>(effective_workers(workers), n_tasks);
  if (threads <= 1) {
    for (Eigen::Index i = 0; i < n_tasks; ++i) task(i);
    return;
  }

  std::atomic<Eigen::Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const Eigen::Index i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace geoavg

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace geoavg {

/// One SplitMix64 step.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for child stream `index` under `master`. Independent of thread layout,
/// so replicated experiments reproduce regardless of worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0xd1342543de82ef95ULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

/// mt19937_64 plus explicit Box-Muller normals and an inverse-CDF geometric
/// sampler. std::normal_distribution and std::geometric_distribution are
/// implementation-defined, which would make seeded output differ between
/// standard libraries; the transforms here are pinned by this code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// +1 or -1 with equal probability.
  double sign() { return (gen_() >> 63) ? 1.0 : -1.0; }

  /// Geometric on {0, 1, 2, ...} with P(k) = p (1-p)^k.
  long geometric(double p) {
    const double u = uniform();
    return static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace geoavg

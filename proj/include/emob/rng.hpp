#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace emob {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (master, stream). Used for per-job and
/// per-purpose random streams so that results never depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Hand-rolled draws: libstdc++ distributions are not specified bit-for-bit
// across implementations, and scenario files must be reproducible.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline int uniform_index(Rng& rng, int n) {
  const int k = static_cast<int>(uniform01(rng) * n);
  return k < n ? k : n - 1;
}

inline double normal(Rng& rng) {
  // Box-Muller; one value per call keeps the stream position simple.
  double u1 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Poisson by CDF inversion with a precomputed exp(-mean). Exact for the
/// small per-step rates the simulator draws.
inline int poisson_inverse(Rng& rng, double mean, double exp_neg_mean) {
  const double u = uniform01(rng);
  double p = exp_neg_mean;
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / k;
    cdf += p;
    if (p < 1e-300) break;
  }
  return k;
}

inline int poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  int total = 0;
  // Split large means into chunks; a sum of Poissons is Poisson.
  while (mean > 30.0) {
    total += poisson_inverse(rng, 30.0, std::exp(-30.0));
    mean -= 30.0;
  }
  return total + poisson_inverse(rng, mean, std::exp(-mean));
}

}  // namespace emob

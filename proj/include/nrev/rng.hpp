#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nrev {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t avalanche64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Independent substream seed for a (base seed, coordinates) tuple. Distinct
// tuples give unrelated streams; stream tags below keep different subsystems
// from colliding on the same coordinates.
inline std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = avalanche64(seed + kGolden);
  h = avalanche64(h ^ (a + kGolden));
  h = avalanche64(h ^ (b + 0xbf58476d1ce4e5b9ull));
  h = avalanche64(h ^ (c + 0x94d049bb133111ebull));
  return h;
}

inline constexpr std::uint64_t kStreamRestart = 0x5245535441525455ull;
inline constexpr std::uint64_t kStreamPixel = 0x504958454c535452ull;
inline constexpr std::uint64_t kStreamOffPeriod = 0x4f46465045524954ull;
inline constexpr std::uint64_t kStreamBlock = 0x424c4f434b535454ull;
inline constexpr std::uint64_t kStreamColumn = 0x434f4c554d4e5354ull;

// SplitMix64 (Steele/Lea/Flood). Used instead of <random> distributions so
// that sampled values are identical across standard libraries and platforms.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += kGolden);
    return avalanche64(z);
  }

  // Uniform in the open interval (0,1); never 0, so log() is safe.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, one value per call.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586 * u2);
  }

  // Gamma(alpha, 1) by Marsaglia-Tsang squeeze, boosted for alpha < 1.
  double gamma(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("gamma: alpha must be > 0");
    if (alpha < 1.0) {
      const double u = uniform01();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }
};

// Poisson sampler: Knuth multiplication below lambda = 30, Hormann's PTRS
// transformed rejection above. Both exact, both driven only by uniform01(),
// so a stream replays identically.
inline std::int64_t poisson_sample(double lambda, SplitMix64& rng) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: lambda must be >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double p = rng.uniform01();
    while (p > limit) {
      ++k;
      p *= rng.uniform01();
    }
    return k;
  }
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    const double u = rng.uniform01() - 0.5;
    const double v = rng.uniform01();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_lambda - lambda - std::lgamma(kf + 1.0)) {
      return static_cast<std::int64_t>(kf);
    }
  }
}

}  // namespace nrev

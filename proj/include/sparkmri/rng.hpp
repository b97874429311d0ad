#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace sparkmri {

/// Counter-based generator: draw i of stream `seed` is a pure function of
/// (seed, i), so parallel consumers get identical values regardless of
/// scheduling. Core mixer is splitmix64.
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t index) const {
    return mix(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in (0, 1]; never 0, safe as a log argument.
  double uniform(std::uint64_t index) const {
    return (static_cast<double>(bits(index) >> 11) + 1.0) * 0x1p-53;
  }

  /// Standard real normal via Box-Muller on draws (2*index, 2*index+1).
  double gauss(std::uint64_t index) const {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Unit complex normal (E|w|^2 = 1): real/imag each N(0, 1/2).
  std::complex<double> cgauss(std::uint64_t index) const {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  /// Derive an independent stream, e.g. one per replica or per coil.
  CounterRng substream(std::uint64_t key) const { return CounterRng{mix(seed ^ mix(key))}; }
};

}  // namespace sparkmri

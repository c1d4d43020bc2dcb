// Deterministic random streams. Every stochastic routine takes a 64-bit seed
// and derives per-realization seeds through splitmix64(master, index), so a
// run is a pure function of its seeds. Transforms are written out by hand
// (instead of std::*_distribution) because the standard distributions are
// implementation-defined and would break bit-reproducibility across
// toolchains.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace vsim {

// Mix (seed, index) into an independent stream seed. Standard splitmix64
// finalizer applied to seed + (index+1)*golden-gamma.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [lo, hi] via rejection-free Lemire-style reduction is
  // overkill for our tiny ranges; plain modulo of a 64-bit draw keeps the
  // bias below 2^-60 and stays portable.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return lo + engine_() % (hi - lo + 1);
  }

  // Exponential with mean `scale` by inversion.
  double exponential(double scale) { return -scale * std::log1p(-uniform01()); }

  // Standard normal, Box-Muller. Draws two uniforms every call (no cached
  // spare) so the stream layout stays obvious.
  double normal() {
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vsim

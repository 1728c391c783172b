#pragma once

#include <cstdint>
#include <random>

namespace phmc {

// All randomness is threaded through an explicit engine; there is no global state.
using Rng = std::mt19937_64;

// splitmix64 finalizer: decorrelates per-run seeds derived from one master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

// Uniform on the open interval (0, 1), so that u <= exp(-inf) is never true.
inline double uniform_open01(Rng& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(rng() >> 11) + 0.5) * scale;
}

}  // namespace phmc

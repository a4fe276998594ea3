#pragma once

#include <cstdint>
#include <random>

#include "shellsep/vec3.hpp"

namespace shellsep {

using Rng = std::mt19937_64;

/// splitmix64 step, used to decorrelate stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream for simulation ball `ball_index` under a global seed.
/// The stream depends only on (seed, ball_index), never on scheduling.
inline Rng make_ball_rng(std::uint64_t seed, std::uint64_t ball_index) {
  std::uint64_t s = seed ^ (0xa0761d6478bd642fULL + ball_index * 0xe7037ed1a0b428dbULL);
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  return Rng(a ^ (b << 1));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Exactly uniform direction on the unit sphere (cos-latitude method).
inline Vec3 random_unit_vector(Rng& rng) {
  const double z = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  const double phi =
      std::uniform_real_distribution<double>(0.0, 2.0 * 3.14159265358979323846)(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace shellsep

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace exitlaw {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream for one trajectory. The stage salt separates independent
// simulation stages (exit sampling, resurrection, thinning) that share a
// master seed; the result depends only on (master, stage, index), never on
// which worker runs the trajectory.
inline Rng trajectory_stream(std::uint64_t master_seed, std::uint64_t stage,
                             std::uint64_t index) {
  return Rng(splitmix64(splitmix64(master_seed ^ splitmix64(stage)) ^ index));
}

// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(rng() >> 11) + 0.5) * scale;
}

inline double standard_exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

}  // namespace exitlaw

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "exitlaw/killing_clock.hpp"
#include "exitlaw/resurrection.hpp"

namespace exitlaw {

// Stream salts; each simulation stage draws from its own family of streams.
inline constexpr std::uint64_t kStageExit = 1;
inline constexpr std::uint64_t kStageResurrect = 2;
inline constexpr std::uint64_t kStageThinning = 3;

/// Kill locations, kill times and integrated hazards of n independent killed
/// trajectories. Trajectory i draws its start and path from stream
/// (seed, stage, i).
struct ChainExitBatch {
  std::vector<std::size_t> location;
  std::vector<double> time;
  std::vector<double> hazard;
};

ChainExitBatch sample_chain_exits(const KilledChain& chain, const RebirthMeasure& start, std::size_t n,
                                  std::uint64_t seed, std::uint64_t stage = kStageExit);

enum class RayMethod { kInversion, kThinning };

struct RayExitBatch {
  std::vector<double> location;
  std::vector<double> time;
  std::vector<double> hazard;
  std::uint64_t rejections = 0;
};

RayExitBatch sample_ray_exits(const RateFunction& kappa, double x0, std::size_t n, RayMethod method,
                              double window, std::uint64_t seed, std::uint64_t stage);

}  // namespace exitlaw

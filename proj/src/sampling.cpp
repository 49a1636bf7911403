#include "exitlaw/sampling.hpp"

#include <numeric>

#include "exitlaw/parallel.hpp"

namespace exitlaw {

ChainExitBatch sample_chain_exits(const KilledChain& chain, const RebirthMeasure& start, std::size_t n,
                                  std::uint64_t seed, std::uint64_t stage) {
  if (start.on_ray() || start.weights().size() != chain.size())
    throw DomainError("start law does not match the chain");
  ChainExitBatch out;
  out.location.resize(n);
  out.time.resize(n);
  out.hazard.resize(n);
  const auto& kappa = chain.kappa().values();
  for_each_chunk(n, kDefaultChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = trajectory_stream(seed, stage, i);
      const std::size_t x0 = start.sample_state(rng);
      double hazard = 0.0;
      const CtmcExit exit = chain.run(x0, rng, [&](std::size_t s, double dt) { hazard += kappa[s] * dt; });
      out.location[i] = exit.location;
      out.time[i] = exit.time;
      out.hazard[i] = hazard;
    }
  });
  return out;
}

RayExitBatch sample_ray_exits(const RateFunction& kappa, double x0, std::size_t n, RayMethod method,
                              double window, std::uint64_t seed, std::uint64_t stage) {
  RayExitBatch out;
  out.location.resize(n);
  out.time.resize(n);
  out.hazard.resize(n);
  std::vector<std::uint64_t> rejections(n, 0);
  for_each_chunk(n, kDefaultChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = trajectory_stream(seed, stage, i);
      const RayExit exit = method == RayMethod::kInversion ? sample_exit_ray_inversion(kappa, x0, rng)
                                                           : sample_exit_ray_thinning(kappa, x0, rng, window);
      out.location[i] = exit.location;
      out.time[i] = exit.time;
      out.hazard[i] = ray_hazard(kappa, x0, exit.location);
      rejections[i] = exit.n_thinning_rejections;
    }
  });
  out.rejections = std::accumulate(rejections.begin(), rejections.end(), std::uint64_t{0});
  return out;
}

}  // namespace exitlaw

#pragma once

#include "caloric/domain.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace caloric {

struct WalkConfig {
  // Time step; 0 selects the domain default.
  double dt = 0.0;
  std::uint64_t seed = 0;
  double bisection_tol = 1e-9;
  std::int64_t max_steps = 100'000'000;
  // Spatial increments are sqrt(2 * diffusivity * dt) xi. The default matches
  // W, the kernel of u_t = Laplace u.
  double diffusivity = 1.0;
};

enum class ExitKind { ContainerSide, ContainerBottom, ObstacleTop, ObstacleSide };

struct ExitTag {
  ExitKind kind = ExitKind::ContainerSide;
  int obstacle = -1;
  // Box faces: 2i for the low side of coordinate i, 2i+1 for the high side.
  int face = -1;
};

struct ExitSample {
  SpaceTimePoint exit;
  ExitTag tag;
  std::int64_t steps = 0;
};

using Target = std::function<bool(const ExitSample&)>;
using PointTarget = std::function<bool(const SpaceTimePoint&)>;

namespace targets {
Target everything();
Target nothing();
Target bottom();
Target container_side();
Target obstacle(int i);
Target any_obstacle();
Target complement(Target t);
Target at_point(PointTarget p);
PointTarget in_box(const Box& b);
}  // namespace targets

// Walk i of a run draws from its own stream seeded by (seed, i).
ExitSample simulate_exit(const SpaceTimeDomain& domain, const SpaceTimePoint& pole, const WalkConfig& cfg,
                         std::uint64_t walk_index = 0);

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::int64_t hits = 0;
};

MCEstimate make_estimate(std::int64_t hits, std::int64_t n, std::uint64_t seed);

std::vector<ExitSample> simulate_batch(const SpaceTimeDomain& domain, const SpaceTimePoint& pole, std::int64_t n,
                                       const WalkConfig& cfg);

MCEstimate estimate_caloric(const SpaceTimeDomain& domain, const SpaceTimePoint& pole, const Target& target,
                            std::int64_t n, const WalkConfig& cfg);

MCEstimate estimate_from(const std::vector<ExitSample>& samples, const Target& target, std::uint64_t seed);

// Count of worker threads for batch runs; 0 means hardware concurrency.
void set_thread_count(int k);
int thread_count();

// Runs f(i) for i in [0, n) over static contiguous chunks.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t begin, std::int64_t end)>& f);

}  // namespace caloric

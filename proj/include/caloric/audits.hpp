#pragma once

#include "caloric/domain.hpp"
#include "caloric/walk.hpp"

#include "json.hpp"

#include <functional>
#include <string>
#include <vector>

namespace caloric {

struct AuditRecord {
  std::string name;
  MCEstimate estimate;
  double bound = 0.0;
  // Standard deviation used for the 3 sigma slack.
  double sigma = 0.0;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

nlohmann::json to_json(const MCEstimate& e);

// Right side of the universal cylinder estimate for U_{r,s}(X0, t0).
double cylinder_bound(const SpaceTimePoint& pole, const SpaceTimePoint& center, double r, double s);

// phi(1, 1/2n + 2)^{-1} max(C_n, (4 pi)^{-n/2}).
double ball_constant(int n);

// Exit point in the open cylinder B(X0, r) x (t0 - s, t0 + s).
PointTarget in_cylinder(const SpaceTimePoint& center, double r, double s);

AuditRecord check_cylinder_estimate(const SpaceTimeDomain& domain, const SpaceTimePoint& pole,
                                    const SpaceTimePoint& center, double r, double s, std::int64_t n,
                                    const WalkConfig& cfg);

AuditRecord check_ball_estimate(const SpaceTimeDomain& domain, const SpaceTimePoint& pole,
                                const SpaceTimePoint& center, double r, std::int64_t n, const WalkConfig& cfg);

// Compares the direct estimate in omega2 with the split through the exits of
// omega1. First legs share streams with the direct walks.
AuditRecord strong_markov_residual(const SpaceTimeDomain& omega1, const SpaceTimeDomain& omega2,
                                   const SpaceTimePoint& pole, const PointTarget& target, std::int64_t n,
                                   const WalkConfig& cfg);

struct PoleGrid {
  // Sample points per axis on each face.
  int per_axis = 3;
};

AuditRecord nested_rectangle_bound(const SpaceTimeDomain& domain, const std::vector<ParabolicRectangle>& h,
                                   const SpaceTimePoint& pole, std::int64_t n, const WalkConfig& cfg,
                                   const PoleGrid& grid = {});

using SpatialTarget = std::function<bool(const Vector&)>;

struct WosConfig {
  std::uint64_t seed = 0;
  double tol = 1e-6;
  std::int64_t max_jumps = 1'000'000;
};

MCEstimate walk_on_spheres(const Footprint& d, const Vector& x, const SpatialTarget& target, std::int64_t n,
                           const WosConfig& cfg);

// Caloric estimate on D x R of A x R against walk on spheres for A.
AuditRecord cylinder_projection_check(const Footprint& d, const Vector& x, const SpatialTarget& target,
                                      std::int64_t n, const WalkConfig& cfg, const WosConfig& wos);

}  // namespace caloric

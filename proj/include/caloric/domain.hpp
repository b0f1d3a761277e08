#pragma once

#include "caloric/geometry.hpp"

#include <variant>
#include <vector>

namespace caloric {

struct SpatialBox {
  Vector lo;
  Vector hi;
};

struct SpatialBall {
  Vector center;
  double radius = 1.0;
};

using Footprint = std::variant<SpatialBox, SpatialBall>;

// Container footprint x (t_lo, t_hi) minus closed obstacle boxes. Time bounds
// may be infinite.
class SpaceTimeDomain {
 public:
  SpaceTimeDomain(Footprint footprint, double t_lo, double t_hi);

  // Open cube z + (-r/2, r/2)^n x (-r^2, 0).
  static SpaceTimeDomain open_cube(const SpaceTimePoint& top_center, double side);
  static SpaceTimeDomain box_cylinder(Vector lo, Vector hi, double t_lo, double t_hi);
  static SpaceTimeDomain ball_cylinder(Vector center, double radius, double t_lo, double t_hi);

  SpaceTimeDomain with_obstacle(const ParabolicRectangle& h) const;
  SpaceTimeDomain with_obstacles(const std::vector<ParabolicRectangle>& hs) const;

  int dim() const { return dim_; }
  const Footprint& footprint() const { return footprint_; }
  bool is_ball() const { return std::holds_alternative<SpatialBall>(footprint_); }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }
  const std::vector<Box>& obstacles() const { return obstacles_; }
  // Sorted finite time levels where the walk must land exactly.
  const std::vector<double>& event_times() const { return events_; }

  bool in_footprint(const Vector& x) const;
  bool in_container(const SpaceTimePoint& p) const;
  bool contains(const SpaceTimePoint& p) const;

  // Parabolic distance from p to the essential boundary: container lateral
  // boundary and bottom, obstacle tops and lateral sides.
  double boundary_distance(const SpaceTimePoint& p) const;

  double feature_size() const;
  double default_dt() const;

  // Container of this lies in the container of other and every obstacle of
  // other is an obstacle of this.
  bool nested_in(const SpaceTimeDomain& other) const;

  friend bool operator==(const SpaceTimeDomain& a, const SpaceTimeDomain& b);

 private:
  void rebuild_events();

  int dim_;
  Footprint footprint_;
  double t_lo_;
  double t_hi_;
  std::vector<Box> obstacles_;
  std::vector<double> events_;
};

bool same_box(const Box& a, const Box& b);

}  // namespace caloric

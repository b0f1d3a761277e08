#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace caloric {

using Vector = Eigen::VectorXd;
using Index = std::vector<std::int64_t>;

struct SpaceTimePoint {
  Vector x;
  double t = 0.0;

  SpaceTimePoint() = default;
  SpaceTimePoint(Vector x_, double t_);

  int dim() const { return static_cast<int>(x.size()); }
};

double p_dist(const SpaceTimePoint& a, const SpaceTimePoint& b);

// Closed balls of this metric are closed parabolic cubes of side lambda.
double dist_infty(const SpaceTimePoint& a, const SpaceTimePoint& b);

// Closed space-time box [lo, hi] x [t_lo, t_hi]; degenerate sides allowed,
// infinite time bounds allowed.
struct Box {
  Vector lo;
  Vector hi;
  double t_lo = 0.0;
  double t_hi = 0.0;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const SpaceTimePoint& p) const;
};

double gap(const Box& a, const Box& b);
double gap(std::span<const Box> a, std::span<const Box> b);
double gap(const SpaceTimePoint& p, const Box& b);

// Closed rectangle: corner + [0,s_1] x ... x [0,s_n] x [0,s_{n+1}^2].
class ParabolicRectangle {
 public:
  ParabolicRectangle(Vector corner, double t0, Vector sides, double time_side);

  static ParabolicRectangle from_box(const Box& b);

  int dim() const { return static_cast<int>(corner_.size()); }
  const Vector& corner() const { return corner_; }
  double t0() const { return t0_; }
  const Vector& sides() const { return sides_; }
  double time_side() const { return time_side_; }
  double duration() const { return time_side_ * time_side_; }
  double t1() const { return t0_ + duration(); }

  Box box() const;
  double volume() const;
  double diam() const;
  bool contains(const SpaceTimePoint& p) const;
  // Strict containment in the interior of other.
  bool inside_interior_of(const ParabolicRectangle& other) const;

 private:
  Vector corner_;
  double t0_;
  Vector sides_;
  double time_side_;
};

enum class Convention { HalfOpen, Open, Closed };

class ParabolicCube {
 public:
  ParabolicCube(int m, int k, Index j);

  static ParabolicCube unit(int m, int n);
  static ParabolicCube parse(const std::string& literal);

  int m() const { return m_; }
  int k() const { return k_; }
  const Index& index() const { return j_; }
  int dim() const { return static_cast<int>(j_.size()) - 1; }

  double side() const;
  double duration() const;
  double vol() const;
  double diam() const;

  Vector lower_corner() const;
  double t_lo() const;
  Vector center() const;
  SpaceTimePoint top_center() const;
  SpaceTimePoint mid_point() const;
  Box box() const;

  std::vector<ParabolicCube> children() const;
  ParabolicCube parent() const;
  ParabolicCube ancestor(int j) const;
  ParabolicCube child(const Index& offset) const;
  bool is_descendant_of(const ParabolicCube& q) const;

  bool contains(const SpaceTimePoint& p, Convention c = Convention::HalfOpen) const;
  std::string literal() const;

  friend bool operator==(const ParabolicCube& a, const ParabolicCube& b) = default;
  friend bool operator<(const ParabolicCube& a, const ParabolicCube& b);

 private:
  int m_;
  int k_;
  Index j_;
};

Index child_index(const Index& parent, int m, const Index& offset);
Index parent_index(const Index& child, int m);
std::int64_t floor_div(std::int64_t a, std::int64_t b);
std::int64_t ipow(std::int64_t base, int e);

// Q open of side r with top center z; F and Q_* share the spatial footprint S.
struct CubeTriple {
  SpaceTimePoint z;
  double r = 1.0;
  double eps = 0.0;
  double delta = 0.0;
  Vector s_lo;
  Vector s_hi;
  std::optional<ParabolicCube> cube;
  std::optional<ParabolicCube> pole_child;
  std::optional<ParabolicCube> target_child;

  int dim() const { return z.dim(); }
  Box q_box() const;
  Box f_box() const;
  Box qstar_box() const;
  // Lateral faces and bottom of the closed cube.
  std::vector<Box> normal_boundary() const;
  // Throws std::invalid_argument naming the first violated invariant.
  void check_invariants(double tol = 1e-12) const;
};

CubeTriple standard_triple(const ParabolicCube& q);

}  // namespace caloric

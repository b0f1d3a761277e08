#pragma once

#include "caloric/geometry.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace caloric {

// Occupied generation-(k0+K) descendants of a root cube.
class GridSet {
 public:
  GridSet(ParabolicCube root, int depth, std::set<Index> occupied);

  const ParabolicCube& root() const { return root_; }
  int depth() const { return depth_; }
  int leaf_generation() const { return root_.k() + depth_; }
  int dim() const { return root_.dim(); }
  int m() const { return root_.m(); }
  bool empty() const { return levels_.back().empty(); }
  std::size_t size() const { return levels_.back().size(); }
  const std::set<Index>& leaves() const { return levels_.back(); }
  // Indices meeting E at generation root.k() + level.
  const std::set<Index>& level(int level) const { return levels_.at(level); }

  bool meets(const ParabolicCube& q) const;
  bool contains_point(const SpaceTimePoint& p) const;
  GridSet restrict_to(const ParabolicCube& q) const;
  GridSet refined(int extra) const;
  GridSet with_root(const ParabolicCube& new_root) const;
  std::vector<Box> leaf_boxes() const;

  static GridSet full(const ParabolicCube& root, int depth);

 private:
  ParabolicCube root_;
  int depth_;
  std::vector<std::set<Index>> levels_;
};

GridSet unite(const GridSet& a, const GridSet& b);

// Scale cap: infinity or m^{-j}.
struct Scale {
  bool infinite = true;
  int j = 0;

  static Scale inf() { return {}; }
  static Scale power(int j_) { return {false, j_}; }
  double value(int m) const;
};

struct NetContentValue {
  double value = 0.0;
  double rho = 0.0;
  Scale delta;
  std::vector<ParabolicCube> witness;
};

// Exact minimum of sum side^rho over antichain covers of E by tree cubes of
// side <= delta. Exponents above n+2 are accepted; at a fixed resolution the
// leaves are then the cheapest cubes representable.
NetContentValue net_content(const GridSet& e, double rho, Scale delta = Scale::inf());

struct ComparisonBounds {
  // H^rho_{sqrt(n) delta} <= lower * M^rho_delta
  double lower = 1.0;
  // M^rho_delta <= upper * H^rho_delta
  double upper = 1.0;
};

ComparisonBounds comparison_bounds(int n, int m, double rho);

void write_gridset(std::ostream& os, const GridSet& e);
GridSet read_gridset(std::istream& is);

// Procedural GridSets from a JSON description {"kind": ..., "root": literal, "K": ...}.
GridSet generate_gridset(const nlohmann::json& spec);

}  // namespace caloric

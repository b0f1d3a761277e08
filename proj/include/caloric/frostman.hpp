#pragma once

#include "caloric/content.hpp"
#include "caloric/geometry.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <vector>

namespace caloric {

class TreeMeasure {
 public:
  // Interior masses are recomputed from the leaves. Without a sweep total the
  // leaf sum is used.
  TreeMeasure(ParabolicCube root, int depth, double rho, std::map<Index, double> leaf_mass,
              std::optional<double> sweep_total = std::nullopt);

  const ParabolicCube& root() const { return root_; }
  int depth() const { return depth_; }
  int leaf_generation() const { return root_.k() + depth_; }
  int dim() const { return root_.dim(); }
  int m() const { return root_.m(); }
  double rho() const { return rho_; }

  // Root value of the construction sweep; equals the leaf sum up to rounding.
  double total() const { return sweep_total_; }
  double leaf_sum() const;
  const std::map<Index, double>& leaf_masses() const { return levels_.back(); }
  const std::map<Index, double>& level(int d) const { return levels_.at(d); }

  double mass(const ParabolicCube& q) const;
  // Exact for the tree measure: uniform within each leaf.
  double measure(const Box& a) const;
  double measure(const ParabolicRectangle& a) const { return measure(a.box()); }

  // max over tree cubes of mass / side^rho.
  double max_growth_ratio() const;
  // max over interior cubes of |mass - sum children| / mass.
  double additivity_defect() const;

  nlohmann::json to_json() const;
  // Throws if additivity or the growth bound fail beyond rel_tol.
  static TreeMeasure from_json(const nlohmann::json& j, double rel_tol = 1e-12);

 private:
  ParabolicCube root_;
  int depth_;
  double rho_;
  double sweep_total_;
  std::vector<std::map<Index, double>> levels_;
};

struct FrostmanTrace {
  // Rescale factor applied at each capped cube (all <= 1).
  std::vector<double> factors;
};

TreeMeasure build_frostman(const GridSet& e, double rho, FrostmanTrace* trace = nullptr);

double frostman_diam_bound(const TreeMeasure& mu, const ParabolicRectangle& a);
bool frostman_diam_bound_check(const TreeMeasure& mu, const ParabolicRectangle& a);

}  // namespace caloric

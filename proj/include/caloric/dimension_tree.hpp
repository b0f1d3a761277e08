#pragma once

#include "caloric/content.hpp"
#include "caloric/frostman.hpp"
#include "caloric/geometry.hpp"

#include "json.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace caloric {

// Cube -> mass, finitely additive over children.
class MeasureOracle {
 public:
  enum class Kind { Frostman, Empirical, Analytic };
  using Evaluator = std::function<double(const ParabolicCube&)>;

  MeasureOracle(Kind kind, Evaluator eval, double total);

  static MeasureOracle frostman(const TreeMeasure& mu);
  // vol(Q) / vol(root) below the root, 0 for cubes disjoint from it.
  static MeasureOracle normalized_volume(const ParabolicCube& root);
  // Point samples binned at generation root.k() + depth; mass = count / n_total.
  static MeasureOracle empirical(const ParabolicCube& root, int depth, const std::vector<SpaceTimePoint>& points,
                                 std::int64_t n_total);

  double operator()(const ParabolicCube& q) const { return eval_(q); }
  double total() const { return total_; }
  Kind kind() const { return kind_; }
  std::string tag() const;
  // |mu(q) - sum of children| / mu(q); 0 when mu(q) = 0.
  double additivity_defect(const ParabolicCube& q) const;
  MeasureOracle scaled(double c) const;

 private:
  Kind kind_;
  Evaluator eval_;
  double total_;
};

enum class CubeType { Type1, Type2, Neither };

std::string to_string(CubeType t);

struct Classification {
  CubeType type = CubeType::Neither;
  // M^{n+2-rho}_{side/m}(E cap Q) against side^{n+2-rho}.
  double content = 0.0;
  double content_threshold = 0.0;
  // sum over children of sqrt(mu(R) vol R) against m^{-lambda} sqrt(mu(Q) vol Q).
  double spread = 0.0;
  double spread_threshold = 0.0;
  std::vector<ParabolicCube> witness;
};

// Type 1 takes precedence when both tests pass.
Classification classify_cube(const ParabolicCube& q, const GridSet& e, const MeasureOracle& mu, double rho,
                             double lambda);

struct TreeNode {
  ParabolicCube cube;
  int parent = -1;
  int level = 0;
  bool terminal = false;
  CubeType type = CubeType::Neither;
  // Type 2 strict ancestors.
  int type2_above = 0;
};

struct MGoalCheck {
  double alpha = 0.0;
  double exponent = 0.0;
  double content = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct TreeParams {
  double rho = 1.0;
  double lambda = 1.0;
  // 0 selects rho / (lambda + rho).
  double eps = 0.0;
  // delta = m^{-delta_j}.
  int delta_j = 1;
};

struct TreeReport {
  bool applicable = true;
  std::vector<ParabolicCube> offenders;

  TreeParams params;
  int s = 0;
  double eta = 0.0;
  std::vector<TreeNode> nodes;
  std::vector<std::vector<int>> levels;

  std::vector<ParabolicCube> terminals;
  std::vector<ParabolicCube> efficient;
  std::vector<ParabolicCube> f_cubes;
  std::vector<ParabolicCube> g_cubes;
  // E leaves inside the efficient and G cubes.
  std::vector<ParabolicCube> f_delta;
  bool covers = false;
  bool disjoint = false;

  // Content scale m^{-content_j} <= m delta^eps.
  int content_j = 0;
  std::vector<MGoalCheck> m_goal;
  double mu_outside = 0.0;
  double mu_outside_from_f = 0.0;
  double mu_outside_bound = 0.0;
  bool mu_pass = false;

  bool pass() const;
  nlohmann::json to_json() const;
};

TreeReport build_dimension_tree(const GridSet& e, const MeasureOracle& mu, const TreeParams& params,
                                const std::vector<double>& alphas = {0.0, 0.1, 0.5});

}  // namespace caloric

#pragma once

#include "caloric/constants.hpp"
#include "caloric/content.hpp"
#include "caloric/frostman.hpp"
#include "caloric/geometry.hpp"
#include "caloric/walk.hpp"

#include "json.hpp"

#include <vector>

namespace caloric {

// u(X, t) = sum over leaves of mass * W(X - Y_c, t - s_c).
double potential(const TreeMeasure& mu, const SpaceTimePoint& p);
std::vector<double> potential(const TreeMeasure& mu, const std::vector<SpaceTimePoint>& pts);

// Maximal cubes all of whose leaf descendants lie in E.
std::vector<ParabolicCube> maximal_full_cubes(const GridSet& e);

// m^{-(n+2)} / (2 alpha_n).
double default_eta(int n, int m);

struct BourgainConfig {
  double eta = 0.0;  // 0 selects default_eta
  double rho = 0.0;  // 0 selects n + 2
  std::int64_t walks = 20'000;
  int pole_grid = 3;
  int check_grid = 8;
  int random_points = 2000;
  bool refine_check = true;
  WalkConfig walk;
};

struct PotentialCheck {
  double value = 0.0;  // min on F for E2, max otherwise
  double bound = 0.0;
  bool pass = false;
  // Bound over value for upper bounds, value over bound for the lower bound.
  double margin = 0.0;
  double refined_margin = 0.0;
  bool stable = true;
};

struct BourgainAudit {
  int n = 1;
  int m = 0;
  double rho = 0.0;
  double eta = 0.0;
  double eps_r = 0.0;
  AlphaLedger ledger;
  double content = 0.0;
  double mu_total = 0.0;
  std::size_t leaves = 0;
  std::vector<ParabolicCube> obstacles;

  PotentialCheck e1;
  PotentialCheck e2;
  PotentialCheck e3;
  double gap_ratio = 0.0;
  double gap_ratio_expected = 0.0;
  bool ratio_pass = false;

  std::vector<SpaceTimePoint> poles;
  std::vector<MCEstimate> estimates;
  double min_estimate = 0.0;
  double min_std_error = 0.0;

  // Alternative 1 with the slack in its favour and with the margin against it.
  bool alt1 = false;
  bool alt1_strict = false;
  double alt2_threshold = 0.0;
  bool alt2 = false;

  bool potential_pass() const { return e1.pass && e2.pass && e3.pass && ratio_pass; }
  bool stable() const { return e1.stable && e2.stable && e3.stable; }
  bool pass() const { return (alt1 || alt2) && potential_pass(); }
  nlohmann::json to_json() const;
};

// E lives on the grid below the triple's target cube or one of its ancestors.
BourgainAudit bourgain_alternative_audit(const GridSet& e, const CubeTriple& triple, const BourgainConfig& cfg);

}  // namespace caloric

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "caloric/bourgain.hpp"

#include <cmath>
#include <numbers>

using namespace caloric;

TEST_CASE("potential of a single atom") {
  const ParabolicCube root = ParabolicCube::unit(3, 1);
  const GridSet e(root, 1, {Index{1, 4}});
  const auto mu = build_frostman(e, 2.0);
  const auto c = ParabolicCube(3, 1, Index{1, 4}).mid_point();
  const SpaceTimePoint p(Vector::Constant(1, 0.9), 0.95);
  const double dt = p.t - c.t;
  const double dx = p.x[0] - c.x[0];
  const double w = std::exp(-dx * dx / (4 * dt)) / std::sqrt(4 * std::numbers::pi * dt);
  CHECK(potential(mu, p) == doctest::Approx(mu.total() * w).epsilon(1e-13));
  // Zero future.
  CHECK(potential(mu, SpaceTimePoint(Vector::Constant(1, 0.5), c.t - 1e-3)) == 0.0);
  const auto many = potential(mu, std::vector<SpaceTimePoint>{p, p});
  CHECK(many[0] == potential(mu, p));
  CHECK(many[1] == many[0]);
}

TEST_CASE("maximal full cubes") {
  const ParabolicCube root = ParabolicCube::unit(2, 1);
  const auto full = GridSet::full(root, 2);
  const auto all = maximal_full_cubes(full);
  REQUIRE(all.size() == 1);
  CHECK(all[0] == root);
  // Drop one leaf: its parent's 7 siblings stay maximal, plus its 7 siblings.
  std::set<Index> occ = full.leaves();
  occ.erase(Index{0, 0});
  const auto part = maximal_full_cubes(GridSet(root, 2, occ));
  CHECK(part.size() == 14);
  for (const auto& q : part) CHECK_FALSE(Index{0, 0} == q.index());
  CHECK(maximal_full_cubes(GridSet(root, 2, {})).empty());
}

TEST_CASE("default eta") {
  for (int n = 1; n <= 3; ++n)
    for (int m : {3, 7})
      CHECK(default_eta(n, m) == doctest::Approx(std::pow(m, -(n + 2)) / (2 * alpha_ledger<double>(n).alpha)).epsilon(1e-15));
}

TEST_CASE("empty E takes the small-content alternative") {
  const auto tr = standard_triple(ParabolicCube::unit(7, 1));
  const GridSet e(*tr.target_child, 1, {});
  BourgainConfig cfg;
  const auto a = bourgain_alternative_audit(e, tr, cfg);
  CHECK(a.content == 0.0);
  CHECK(a.alt2);
  CHECK(a.pass());
  CHECK(a.gap_ratio == doctest::Approx(std::exp(5.0 / 12)).epsilon(1e-12));
  CHECK(a.ratio_pass);
}

TEST_CASE("full target cube gives the hitting alternative") {
  const auto tr = standard_triple(ParabolicCube::unit(7, 1));
  const auto e = GridSet::full(*tr.target_child, 1);
  BourgainConfig cfg;
  cfg.walks = 2000;
  cfg.random_points = 300;
  cfg.refine_check = false;
  cfg.walk.seed = 1;
  const auto a = bourgain_alternative_audit(e, tr, cfg);
  INFO(a.to_json().dump());
  CHECK(a.content == doctest::Approx(std::pow(7.0, -3)).epsilon(1e-13));
  CHECK(a.mu_total == a.content);
  CHECK(a.eta == default_eta(1, 7));
  CHECK(a.e1.pass);
  CHECK(a.e2.pass);
  CHECK(a.e3.pass);
  CHECK(a.alt1);
  CHECK(a.alt1_strict);
  CHECK_FALSE(a.alt2);
  CHECK(a.pass());
  CHECK(a.poles.size() == 9);
  CHECK(a.min_estimate > 0.4);
}

TEST_CASE("configuration errors") {
  const auto tr = standard_triple(ParabolicCube::unit(7, 1));
  const auto e = GridSet::full(*tr.target_child, 1);
  BourgainConfig cfg;
  cfg.rho = 0.5;
  CHECK_THROWS(bourgain_alternative_audit(e, tr, cfg));
  const auto other = GridSet::full(ParabolicCube::unit(3, 1), 1);
  CHECK_THROWS(bourgain_alternative_audit(other, tr, BourgainConfig{}));
}

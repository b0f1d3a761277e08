#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "caloric/dimension_tree.hpp"

#include <cmath>
#include <random>

using namespace caloric;

namespace {

// All mass spread uniformly over one child of the unit cube.
MeasureOracle concentrated(const ParabolicCube& child) {
  return MeasureOracle(
      MeasureOracle::Kind::Analytic,
      [child](const ParabolicCube& q) {
        if (child.is_descendant_of(q)) return 1.0;
        if (q.is_descendant_of(child)) return q.vol() / child.vol();
        return 0.0;
      },
      1.0);
}

}  // namespace

TEST_CASE("a cube missing E is type 1") {
  const auto root = ParabolicCube::unit(3, 1);
  const GridSet e(root, 2, {Index{0, 0}});
  const auto mu = MeasureOracle::normalized_volume(root);
  const auto c = classify_cube(ParabolicCube(3, 1, Index{2, 8}), e, mu, 1.0, 1.0);
  CHECK(c.type == CubeType::Type1);
  CHECK(c.content == 0.0);
}

TEST_CASE("normalized volume spreads evenly") {
  for (int n = 1; n <= 2; ++n) {
    const auto root = ParabolicCube::unit(3, n);
    const auto e = GridSet::full(root, 2);
    const auto mu = MeasureOracle::normalized_volume(root);
    for (const double lambda : {0.25, 1.0}) {
      const auto c = classify_cube(root, e, mu, 1.0, lambda);
      // Children sum to sqrt(mu(Q) vol Q) exactly.
      CHECK(c.spread == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(c.spread_threshold == doctest::Approx(std::pow(3.0, -lambda)).epsilon(1e-14));
      CHECK(c.type == CubeType::Neither);
    }
    // Full E has content m^rho side^{n+2-rho} at scale side/m.
    const auto c = classify_cube(root, e, mu, 1.0, 1.0);
    CHECK(c.content == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(c.content_threshold == doctest::Approx(1.0));
    // lambda = 0 is the equality case.
    CHECK(classify_cube(root, e, mu, 1.0, 0.0).type == CubeType::Type2);
  }
}

TEST_CASE("concentrated child threshold at lambda = (n+2)/2") {
  for (int n = 1; n <= 2; ++n) {
    const auto root = ParabolicCube::unit(3, n);
    const auto e = GridSet::full(root, 2);
    const auto mu = concentrated(root.children().front());
    const double crit = (n + 2) / 2.0;
    CHECK(classify_cube(root, e, mu, 1.0, crit - 0.01).type == CubeType::Type2);
    CHECK(classify_cube(root, e, mu, 1.0, crit).type == CubeType::Type2);
    CHECK(classify_cube(root, e, mu, 1.0, crit + 0.01).type == CubeType::Neither);
    const auto c = classify_cube(root, e, mu, 1.0, crit);
    CHECK(c.spread == doctest::Approx(std::pow(3.0, -(n + 2) / 2.0)).epsilon(1e-14));
  }
}

TEST_CASE("classification is invariant under scaling mu") {
  std::mt19937_64 rng(1);
  for (int it = 0; it < 20; ++it) {
    const GridSet e = generate_gridset({{"kind", "percolation"}, {"root", "3:0:0,0"}, {"K", 3}, {"p", 0.5}, {"seed", it}});
    if (e.empty()) continue;
    const auto mu = MeasureOracle::frostman(build_frostman(e, 1.0));
    const auto mu3 = mu.scaled(3.0);
    for (int d = 0; d <= 1; ++d)
      for (const auto& j : e.level(d)) {
        const ParabolicCube q(3, d, j);
        for (const double lambda : {0.3, 1.0, 1.5}) {
          const auto a = classify_cube(q, e, mu, 1.0, lambda);
          const auto b = classify_cube(q, e, mu3, 1.0, lambda);
          CHECK(a.type == b.type);
          CHECK(b.spread == doctest::Approx(std::sqrt(3.0) * a.spread).epsilon(1e-12));
        }
      }
  }
}

TEST_CASE("type 1 witness is a cover at the capped scale") {
  const GridSet e(ParabolicCube::unit(3, 1), 3, {Index{0, 0}, Index{1, 2}});
  const auto mu = MeasureOracle::frostman(build_frostman(e, 1.0));
  const auto c = classify_cube(ParabolicCube::unit(3, 1), e, mu, 1.0, 1.0);
  CHECK(c.type == CubeType::Type1);
  // Both leaves share depth-1 and depth-2 ancestors; at exponent 2 the costs are
  // 1/9, 1/81 and 2/729 for the two leaves themselves.
  CHECK(c.content == doctest::Approx(2.0 / 729).epsilon(1e-14));
  REQUIRE(c.witness.size() == 2);
  CHECK(c.witness[0].k() == 3);
  const auto deep = classify_cube(ParabolicCube::unit(3, 1), e, mu, 1.5, 1.0);
  // Exponent 1.5: 3^-1.5, 3^-3 = 0.037 and 2 * 3^-4.5 = 0.014.
  CHECK(deep.content == doctest::Approx(2 * std::pow(3.0, -4.5)).epsilon(1e-14));
}

TEST_CASE("bottom slab builds a passing tree") {
  const GridSet e = generate_gridset({{"kind", "slab"}, {"root", "3:0:0,0"}, {"K", 4}, {"time_rows", {0}}});
  const auto mu = MeasureOracle::frostman(build_frostman(e, 1.0));
  TreeParams p;
  p.rho = 1.0;
  p.lambda = 1.0;
  p.delta_j = 4;
  const auto r = build_dimension_tree(e, mu, p);
  INFO(r.to_json().dump());
  CHECK(r.applicable);
  CHECK(r.s == 2);
  CHECK(r.covers);
  CHECK(r.disjoint);
  CHECK(r.mu_pass);
  CHECK(r.pass());
  CHECK(r.m_goal.size() == 3);
  CHECK(r.content_j == 1);
  // Node bookkeeping.
  for (const auto& nd : r.nodes) {
    if (nd.parent < 0) {
      CHECK(nd.type2_above == 0);
      continue;
    }
    const auto& par = r.nodes[nd.parent];
    // Type 1 children come from the content witness and may skip generations.
    CHECK(nd.cube.is_descendant_of(par.cube));
    CHECK(nd.cube.k() > par.cube.k());
    if (par.type != CubeType::Type1) CHECK(nd.cube.parent() == par.cube);
    CHECK(nd.level == par.level + 1);
    CHECK(nd.type2_above == par.type2_above + (par.type == CubeType::Type2 ? 1 : 0));
  }
}

TEST_CASE("random sets keep the partition invariants") {
  for (int seed = 0; seed < 15; ++seed) {
    const GridSet e = generate_gridset({{"kind", "percolation"}, {"root", "2:0:0,0"}, {"K", 4}, {"p", 0.6}, {"seed", seed}});
    if (e.empty()) continue;
    const auto mu = MeasureOracle::frostman(build_frostman(e, 1.5));
    TreeParams p;
    p.rho = 1.5;
    p.lambda = 0.5;
    p.delta_j = 3;
    const auto r = build_dimension_tree(e, mu, p);
    if (!r.applicable) {
      CHECK_FALSE(r.offenders.empty());
      CHECK_FALSE(r.pass());
      continue;
    }
    CHECK(r.covers);
    CHECK(r.disjoint);
    CHECK(r.mu_outside <= mu.total() + 1e-12);
  }
}

TEST_CASE("normalized volume on a full set is not applicable") {
  const auto root = ParabolicCube::unit(3, 1);
  const auto e = GridSet::full(root, 3);
  TreeParams p;
  p.rho = 1.0;
  p.lambda = 1.0;
  p.delta_j = 3;
  const auto r = build_dimension_tree(e, MeasureOracle::normalized_volume(root), p);
  CHECK_FALSE(r.applicable);
  CHECK_FALSE(r.pass());
  CHECK_FALSE(r.offenders.empty());
  CHECK(r.offenders.front() == root);
}

TEST_CASE("parameter errors") {
  const auto root = ParabolicCube::unit(3, 1);
  const auto e = GridSet::full(root, 2);
  const auto mu = MeasureOracle::normalized_volume(root);
  CHECK_THROWS(classify_cube(root, e, mu, 3.0, 1.0));
  CHECK_THROWS(classify_cube(root, e, mu, 0.0, 1.0));
  CHECK_THROWS(classify_cube(root, e, mu, 1.0, -1.0));
  CHECK_THROWS(classify_cube(ParabolicCube(3, 2, Index{0, 0}), e, mu, 1.0, 1.0));
  TreeParams p;
  p.delta_j = 5;
  CHECK_THROWS(build_dimension_tree(e, mu, p));
  p.delta_j = 0;
  CHECK_THROWS(build_dimension_tree(e, mu, p));
}

TEST_CASE("empirical oracle is additive") {
  const auto root = ParabolicCube::unit(2, 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SpaceTimePoint> pts;
  for (int i = 0; i < 5000; ++i) {
    Vector x(2);
    x << u(rng), u(rng);
    pts.emplace_back(x, u(rng));
  }
  const auto mu = MeasureOracle::empirical(root, 3, pts, 10000);
  CHECK(mu.tag() == "empirical-MC");
  CHECK(mu(root) == doctest::Approx(0.5));
  CHECK(mu.additivity_defect(root) <= 1e-15);
  for (const auto& c : root.children()) CHECK(mu.additivity_defect(c) <= 1e-15);
  CHECK_THROWS(MeasureOracle::empirical(root, 3, pts, 10));
}

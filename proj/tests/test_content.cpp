#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "brute_force.hpp"
#include "caloric/content.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace caloric;
using caloric::testing::brute_force_content;

namespace {

GridSet random_sparse(std::mt19937_64& rng, int m, int depth, int count) {
  const auto s = ipow(m, depth);
  std::uniform_int_distribution<std::int64_t> xs(0, s - 1), ts(0, s * s - 1);
  std::set<Index> occ;
  for (int i = 0; i < count; ++i) occ.insert(Index{xs(rng), ts(rng)});
  return GridSet(ParabolicCube::unit(m, 1), depth, occ);
}

// Leaves clustered under one random cube so that caps actually bind.
GridSet random_clustered(std::mt19937_64& rng, int m, int depth, int count) {
  std::uniform_int_distribution<int> gen(0, depth - 1);
  const int g = gen(rng);
  const auto s = ipow(m, g);
  std::uniform_int_distribution<std::int64_t> xs(0, s - 1), ts(0, s * s - 1);
  const ParabolicCube anchor(m, g, Index{xs(rng), ts(rng)});
  const int extra = depth - g;
  const auto e = ipow(m, extra);
  std::uniform_int_distribution<std::int64_t> xo(0, e - 1), to(0, e * e - 1);
  std::set<Index> occ;
  for (int i = 0; i < count; ++i)
    occ.insert(Index{anchor.index()[0] * e + xo(rng), anchor.index()[1] * e * e + to(rng)});
  return GridSet(ParabolicCube::unit(m, 1), depth, occ);
}

}  // namespace

TEST_CASE("full root costs 1") {
  for (int n = 1; n <= 2; ++n)
    for (int m : {2, 3}) {
      const auto e = GridSet::full(ParabolicCube::unit(m, n), 2);
      for (double rho : {0.5, 1.0, 2.0, n + 1.5}) {
        const auto v = net_content(e, rho);
        CHECK(v.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.witness.size() == 1);
      }
      // rho = n+2: every antichain costs the total volume.
      CHECK(net_content(e, n + 2.0).value == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(net_content(e, n + 2.0, Scale::power(2)).value == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("two of 27 children") {
  std::set<Index> occ{{0, 0}, {2, 5}};
  const GridSet e(ParabolicCube::unit(3, 1), 1, occ);
  const auto v = net_content(e, 1.0);
  CHECK(v.value == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(brute_force_content(e, 1.0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(v.witness.size() == 2);
}

TEST_CASE("DP equals exhaustive antichain minimum") {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int it = 0; compared < 400 && it < 5000; ++it) {
    const int m = 2 + it % 2;
    const int depth = 1 + (it / 2) % 3;
    const int count = 1 + static_cast<int>(rng() % 6);
    const GridSet e = it % 3 == 0 ? random_sparse(rng, m, depth, count) : random_clustered(rng, m, depth, count);
    std::uniform_real_distribution<double> rr(0.2, 3.0);
    const double rho = rr(rng);
    const double bf = brute_force_content(e, rho);
    if (std::isinf(bf)) continue;
    ++compared;
    const auto v = net_content(e, rho);
    CHECK(v.value == doctest::Approx(bf).epsilon(1e-12));
    double w = 0.0;
    for (const auto& q : v.witness) w += std::pow(q.side(), rho);
    CHECK(w == doctest::Approx(v.value).epsilon(1e-12));
    // Scale-capped variant.
    const int j = 1 + static_cast<int>(rng() % depth);
    CHECK(net_content(e, rho, Scale::power(j)).value ==
          doctest::Approx(brute_force_content(e, rho, j)).epsilon(1e-12));
  }
  CHECK(compared >= 300);
}

TEST_CASE("small full sets against exhaustive search") {
  // m=2, n=1, depth 1: all 8 children occupied.
  const auto e = GridSet::full(ParabolicCube::unit(2, 1), 1);
  for (double rho : {0.5, 2.0, 3.0})
    CHECK(net_content(e, rho).value == doctest::Approx(brute_force_content(e, rho)).epsilon(1e-13));
}

TEST_CASE("witness is an antichain cover with allowed sides") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 50; ++it) {
    const GridSet e = random_clustered(rng, 3, 3, 20);
    const auto v = net_content(e, 1.5, Scale::power(1));
    for (std::size_t a = 0; a < v.witness.size(); ++a) {
      CHECK(v.witness[a].k() >= 1);
      for (std::size_t b = a + 1; b < v.witness.size(); ++b) {
        CHECK_FALSE(v.witness[a].is_descendant_of(v.witness[b]));
        CHECK_FALSE(v.witness[b].is_descendant_of(v.witness[a]));
      }
    }
    for (const auto& j : e.leaves()) {
      const ParabolicCube leaf(3, 3, j);
      bool hit = false;
      for (const auto& q : v.witness) hit = hit || leaf.is_descendant_of(q);
      CHECK(hit);
    }
  }
}

TEST_CASE("monotonicity, subadditivity and scaling") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 60; ++it) {
    const int m = 2 + it % 2;
    const GridSet a = random_clustered(rng, m, 3, 12);
    const GridSet b = random_sparse(rng, m, 3, 6);
    const double rho = 1.0 + 0.5 * (it % 4);
    const double va = net_content(a, rho).value;
    const double vb = net_content(b, rho).value;
    const double vab = net_content(unite(a, b), rho).value;
    CHECK(vab <= va + vb + 1e-12);
    CHECK(va <= vab + 1e-12);
    double prev = 0.0;
    for (int j = 3; j >= 0; --j) {
      const double v = net_content(a, rho, Scale::power(j)).value;
      if (j < 3) CHECK(v <= prev + 1e-12);
      prev = v;
    }
    CHECK(net_content(a, rho, Scale::inf()).value <= prev + 1e-12);
    // Dilation by 1/m: re-root one generation deeper.
    const ParabolicCube deeper(m, 1, Index{1, 0});
    const double vd = net_content(a.with_root(deeper), rho).value;
    CHECK(vd == doctest::Approx(va * std::pow(m, -rho)).epsilon(1e-12));
  }
}

TEST_CASE("comparison bounds") {
  const auto b = comparison_bounds(1, 2, 1.0);
  CHECK(b.upper == doctest::Approx(18.0));
  CHECK(b.lower == doctest::Approx(1.0));
  CHECK(comparison_bounds(2, 3, 2.0).lower == doctest::Approx(2.0));

  // Random rectangle covers of E, scaled by the upper factor, dominate the DP.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    const int m = 2 + it % 2;
    const GridSet e = random_clustered(rng, m, 3, 8);
    const double rho = 0.5 + 2.0 * u(rng);
    double cost = 0.0;
    for (const auto& box : e.leaf_boxes()) {
      // A rectangle containing the leaf with random margins.
      const double grow_x = u(rng) * 0.3, grow_t = u(rng) * 0.1;
      const double sx = box.hi[0] - box.lo[0] + grow_x;
      const double st = box.t_hi - box.t_lo + grow_t;
      cost += std::pow(std::max(sx, std::sqrt(st)), rho);
    }
    const auto cb = comparison_bounds(1, m, rho);
    CHECK(net_content(e, rho).value <= cb.upper * cost + 1e-12);
    // The witness is itself a rectangle cover of diameter sqrt(n) side.
    const auto v = net_content(e, rho);
    double h = 0.0;
    for (const auto& q : v.witness) h += std::pow(q.diam(), rho);
    CHECK(h <= cb.lower * v.value * (1 + 1e-12));
  }
}

TEST_CASE("exponents above n+2 vanish under refinement") {
  double prev = 2.0;
  for (int k = 0; k <= 3; ++k) {
    const double v = net_content(GridSet::full(ParabolicCube::unit(3, 1), k), 4.0).value;
    CHECK(v == doctest::Approx(std::pow(3.0, -k)).epsilon(1e-12));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("preconditions") {
  const auto e = GridSet::full(ParabolicCube::unit(3, 1), 1);
  CHECK_THROWS(net_content(e, 0.0));
  CHECK_THROWS(net_content(e, -1.0));
  CHECK_THROWS(net_content(e, 1.0, Scale::power(2)));
  CHECK_THROWS(GridSet(ParabolicCube::unit(3, 1), 1, {Index{5, 0}}));
  CHECK(net_content(GridSet(ParabolicCube::unit(3, 1), 2, {}), 1.0).value == 0.0);
}

TEST_CASE("meets and restriction") {
  std::set<Index> occ{{4, 10}};
  const GridSet e(ParabolicCube::unit(3, 1), 2, occ);
  CHECK(e.meets(ParabolicCube(3, 1, Index{1, 1})));
  CHECK_FALSE(e.meets(ParabolicCube(3, 1, Index{0, 1})));
  const auto r = e.restrict_to(ParabolicCube(3, 1, Index{1, 1}));
  CHECK(r.size() == 1);
  CHECK(r.depth() == 1);
  CHECK(e.refined(1).size() == 27);
}

TEST_CASE("gridset file round trip") {
  std::mt19937_64 rng(3);
  const GridSet e = random_sparse(rng, 3, 2, 9);
  std::stringstream ss;
  write_gridset(ss, e);
  const GridSet back = read_gridset(ss);
  CHECK(back.leaves() == e.leaves());
  CHECK(back.root() == e.root());
  CHECK(back.depth() == e.depth());
  std::stringstream bad("gridset 1 3 3:0:0,0 1\n0 0 0\n");
  CHECK_THROWS(read_gridset(bad));
  std::stringstream bad2("grid 1 3 3:0:0,0 1\n");
  CHECK_THROWS(read_gridset(bad2));
}

TEST_CASE("procedural generators") {
  const auto full = generate_gridset({{"kind", "full"}, {"root", "3:0:0,0"}, {"K", 2}});
  CHECK(full.size() == 729);
  const auto slab = generate_gridset({{"kind", "slab"}, {"root", "3:0:0,0"}, {"K", 2}, {"time_rows", {0}}});
  CHECK(slab.size() == 9);
  const auto perc = generate_gridset({{"kind", "percolation"}, {"root", "3:0:0,0"}, {"K", 2}, {"p", 0.3}, {"seed", 9}});
  const auto perc2 = generate_gridset({{"kind", "percolation"}, {"root", "3:0:0,0"}, {"K", 2}, {"p", 0.3}, {"seed", 9}});
  CHECK(perc.leaves() == perc2.leaves());
  const auto cubes = generate_gridset({{"kind", "cubes"}, {"root", "3:0:0,0"}, {"K", 2}, {"cubes", {"3:1:0,0"}}});
  CHECK(cubes.size() == 27);
  // Middle-thirds product in space, full in time.
  const auto prod = generate_gridset({{"kind", "product"}, {"root", "3:0:0,0"}, {"K", 2},
                                      {"space_digits", {0, 2}}, {"time_digits", {0, 1, 2, 3, 4, 5, 6, 7, 8}}});
  CHECK(prod.size() == 4 * 81);
  CHECK_THROWS(generate_gridset({{"kind", "nope"}, {"root", "3:0:0,0"}, {"K", 1}}));
}

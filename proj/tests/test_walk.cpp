#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "caloric/domain.hpp"
#include "caloric/walk.hpp"

#include <cmath>
#include <numbers>

using namespace caloric;

namespace {

SpaceTimePoint pt1(double x, double t) { return {Vector::Constant(1, x), t}; }

// Survival of dX = sqrt(2 kappa) dB in (-1, 1) from 0 up to time T.
double survival_series(double kappa, double T) {
  double s = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double a = 2 * k + 1;
    s += 4 / std::numbers::pi * (k % 2 ? -1.0 : 1.0) / a * std::exp(-kappa * a * a * std::numbers::pi * std::numbers::pi * T / 4);
  }
  return s;
}

const SpaceTimeDomain kInterval =
    SpaceTimeDomain::box_cylinder(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0), 0.0, 1.0);

}  // namespace

TEST_CASE("series oracle sanity") {
  // Large T: one mode dominates.
  CHECK(survival_series(0.5, 20.0) == doctest::Approx(4 / std::numbers::pi * std::exp(-std::numbers::pi * std::numbers::pi * 20 / 8)).epsilon(1e-10));
    // Small T: exit needs a 4.5 sigma excursion.
  CHECK(survival_series(0.5, 0.05) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(survival_series(0.5, 0.05) < 1.0);
}

TEST_CASE("zero future on every sample") {
  WalkConfig cfg;
  cfg.seed = 12;
  const auto dom = kInterval.with_obstacle(ParabolicRectangle(Vector::Constant(1, 0.2), 0.3, Vector::Constant(1, 0.3), 0.4));
  const auto pole = pt1(0.0, 0.95);
  const auto samples = simulate_batch(dom, pole, 20000, cfg);
  for (const auto& s : samples) {
    CHECK(s.exit.t < pole.t);
    CHECK(s.steps >= 1);
  }
}

TEST_CASE("interval survival matches the eigenfunction series") {
  for (double kappa : {0.5, 1.0}) {
    WalkConfig cfg;
    cfg.seed = 2025;
    cfg.diffusivity = kappa;
    const auto est = estimate_caloric(kInterval, pt1(0.0, 1.0 - 1e-12), targets::bottom(), 100000, cfg);
    const double exact = survival_series(kappa, 1.0 - 1e-12);
    INFO("kappa=" << kappa << " mean=" << est.mean << " exact=" << exact << " se=" << est.std_error);
    CHECK(std::abs(est.mean - exact) <= 3 * est.std_error);
  }
}

TEST_CASE("exit points lie on the boundary") {
  WalkConfig cfg;
  cfg.seed = 8;
  const auto samples = simulate_batch(kInterval, pt1(0.3, 0.9), 5000, cfg);
  for (const auto& s : samples) {
    if (s.tag.kind == ExitKind::ContainerSide) CHECK(std::abs(std::abs(s.exit.x[0]) - 1.0) <= cfg.bisection_tol);
    if (s.tag.kind == ExitKind::ContainerBottom) CHECK(s.exit.t == 0.0);
  }
  const auto ball = SpaceTimeDomain::ball_cylinder(Vector::Zero(2), 1.0, 0.0, 1.0);
  Vector x0(2);
  x0 << 0.2, -0.1;
  for (const auto& s : simulate_batch(ball, {x0, 0.999}, 3000, cfg))
    if (s.tag.kind == ExitKind::ContainerSide) CHECK(std::abs(s.exit.x.norm() - 1.0) <= 1e-9);
}

TEST_CASE("estimates are probabilities and complements sum to one") {
  WalkConfig cfg;
  cfg.seed = 77;
  const auto dom = kInterval.with_obstacle(ParabolicRectangle(Vector::Constant(1, -0.5), 0.4, Vector::Constant(1, 0.4), 0.3));
  const auto pole = pt1(-0.2, 0.8);
  const auto all = estimate_caloric(dom, pole, targets::everything(), 2000, cfg);
  CHECK(all.mean == 1.0);
  CHECK(all.std_error == 0.0);
  CHECK(estimate_caloric(dom, pole, targets::nothing(), 2000, cfg).mean == 0.0);
  const auto a = estimate_caloric(dom, pole, targets::obstacle(0), 4000, cfg);
  const auto b = estimate_caloric(dom, pole, targets::complement(targets::obstacle(0)), 4000, cfg);
  CHECK(a.hits + b.hits == 4000);
  CHECK(a.mean + b.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.mean > 0.0);
  CHECK(a.mean < 1.0);
  CHECK(a.std_error == doctest::Approx(std::sqrt(a.mean * (1 - a.mean) / 4000)).epsilon(1e-14));
}

TEST_CASE("seed determinism and schedule independence") {
  WalkConfig cfg;
  cfg.seed = 31337;
  const auto pole = pt1(0.1, 0.7);
  set_thread_count(1);
  const auto a = estimate_caloric(kInterval, pole, targets::bottom(), 3000, cfg);
  set_thread_count(3);
  const auto b = estimate_caloric(kInterval, pole, targets::bottom(), 3000, cfg);
  set_thread_count(0);
  CHECK(a.hits == b.hits);
  const auto s1 = simulate_exit(kInterval, pole, cfg, 17);
  const auto s2 = simulate_exit(kInterval, pole, cfg, 17);
  CHECK(s1.exit.t == s2.exit.t);
  CHECK(s1.exit.x[0] == s2.exit.x[0]);
  cfg.seed = 31338;
  const auto c = estimate_caloric(kInterval, pole, targets::bottom(), 3000, cfg);
  CHECK(c.seed == 31338);
}

TEST_CASE("full blocking slab below the pole") {
  const auto dom = kInterval.with_obstacle(ParabolicRectangle(Vector::Constant(1, -1.0), 0.4, Vector::Constant(1, 2.0), 0.1));
  const auto pole = pt1(0.0, 0.41 + 1e-3);
  double prev = 0.0;
  for (double dt : {1e-3, 1e-4, 1e-5}) {
    WalkConfig cfg;
    cfg.seed = 5;
    cfg.dt = dt;
    const auto e = estimate_caloric(dom, pole, targets::obstacle(0), 2000, cfg);
    CHECK(e.mean >= prev);
    CHECK(e.mean > 0.999);
    prev = e.mean;
  }
}

TEST_CASE("dt refinement of the survival bias") {
  // With bridge correction the bias is already below the noise; it must not grow.
  const double exact = survival_series(0.5, 1.0 - 1e-12);
  double prev_bias = 1.0;
  double prev_se = 0.0;
  for (double dt : {0.04, 0.02, 0.01, 0.005}) {
    WalkConfig cfg;
    cfg.seed = 404;
    cfg.dt = dt;
    cfg.diffusivity = 0.5;
    const auto e = estimate_caloric(kInterval, pt1(0.0, 1.0 - 1e-12), targets::bottom(), 40000, cfg);
    const double bias = std::abs(e.mean - exact);
    CHECK(bias <= prev_bias + 3 * std::hypot(e.std_error, prev_se));
    prev_bias = bias;
    prev_se = e.std_error;
  }
}

TEST_CASE("errors") {
  WalkConfig cfg;
  CHECK_THROWS(simulate_exit(kInterval, pt1(2.0, 0.5), cfg));
  CHECK_THROWS(simulate_exit(kInterval, pt1(0.0, 1.5), cfg));
  const auto dom = kInterval.with_obstacle(ParabolicRectangle(Vector::Constant(1, -0.5), 0.2, Vector::Constant(1, 1.0), 0.5));
  CHECK_THROWS(simulate_exit(dom, pt1(0.0, 0.3), cfg));
  WalkConfig bad;
  bad.dt = -1;
  CHECK_THROWS(simulate_exit(kInterval, pt1(0.0, 0.5), bad));
  bad = WalkConfig{};
  bad.diffusivity = 0.0;
  CHECK_THROWS(simulate_exit(kInterval, pt1(0.0, 0.5), bad));
  // Infinite cylinder: only max_steps stops a walk.
  const auto inf = SpaceTimeDomain::box_cylinder(Vector::Constant(1, -1e6), Vector::Constant(1, 1e6),
                                                 -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  WalkConfig few;
  few.max_steps = 10;
  few.dt = 1e-3;
  CHECK_THROWS_AS(simulate_exit(inf, pt1(0.0, 0.0), few), std::runtime_error);
}

TEST_CASE("default time step policy") {
  CHECK(kInterval.default_dt() == doctest::Approx(std::pow(kInterval.feature_size(), 2) / 400));
  const auto dom = kInterval.with_obstacle(ParabolicRectangle(Vector::Constant(1, 0.0), 0.2, Vector::Constant(1, 0.1), 0.1));
  CHECK(dom.default_dt() <= kInterval.default_dt());
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "caloric/constants.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

using namespace caloric;
using Big = boost::multiprecision::cpp_bin_float_100;

namespace {

// alpha_n from the raw factors: the peak of the vertical trace is (n / 2 pi e)^{n/2}.
Big hand_alpha(int n) {
  const Big pi = boost::math::constants::pi<Big>();
  const Big nn(n);
  const Big cn = pow(nn / (2 * pi * exp(Big(1))), nn / 2);
  const Big trace = std::max(Big(pow(Big(2), nn) * cn), Big(pow(2 * pi, -nn / 2)));
  const Big e1 = 2 * pow(Big(3), nn + 1) * trace;
  const Big gap = pow(12 * pi, -nn / 2) * (exp(-nn / 12) - exp(-nn / 2));
  return 2 * e1 / (pow(Big(2), -(nn + 1)) * gap);
}

}  // namespace

TEST_CASE("alpha ledger against an independent evaluation") {
  for (int n = 1; n <= 5; ++n) {
    const auto a = alpha_ledger<double>(n);
    CHECK(a.alpha == doctest::Approx(static_cast<double>(hand_alpha(n))).epsilon(1e-13));
    CHECK(a.gap == doctest::Approx(a.e2 - a.e3).epsilon(1e-15));
    CHECK(a.frostman_c == std::ldexp(1.0, -(n + 1)));
    const auto w = alpha_ledger<Wide>(n);
    CHECK(static_cast<double>(w.alpha) == doctest::Approx(a.alpha).epsilon(1e-14));
  }
  CHECK(alpha_ledger<double>(1).alpha == doctest::Approx(1364.785).epsilon(1e-6));
  CHECK_THROWS(alpha_ledger<double>(0));
}

TEST_CASE("rho condition as rho goes to zero") {
  for (int n = 1; n <= 3; ++n)
    for (int m : {7, 9, 25}) {
      const Big mb(m);
      const int d = n + 3;
      const Big expect = 1 - pow(mb, -(d + 1) * (n + 2)) / 2;
      CHECK(static_cast<double>((rho_stip_lhs<Big>(n, mb, Big(0)) - expect) / pow(mb, -(d + 1) * (n + 2))) ==
            doctest::Approx(0.0).epsilon(1e-30));
      // The cancellation-free deficit agrees with the direct form.
      for (double rho : {1e-6, 1e-3, 0.1}) {
        const Big direct = 1 - rho_stip_lhs<Big>(n, mb, Big(rho));
        const Big stable = rho_deficit<Big>(n, mb, log(mb), Big(rho));
        CHECK(static_cast<double>(abs(direct - stable) / abs(direct)) < 1e-40);
      }
    }
}

TEST_CASE("selected constants satisfy every inequality") {
  for (int n = 1; n <= 3; ++n) {
    const auto r = lemma2_constants(n);
    INFO("n=" << n);
    CHECK(r.search == "asymptotic");
    CHECK(r.d == n + 3);
    CHECK(r.alpha == doctest::Approx(alpha_ledger<double>(n).alpha).epsilon(1e-15));
    const auto g = grid_eval<Wide>(n, r.m, r.log_m, Wide(r.alpha));
    CHECK(g.k_ok);
    CHECK(g.accept);
    CHECK(g.lhs < 1);
    CHECK(r.rho > 0);
    CHECK(r.rho < r.rho_upper);
    CHECK(r.rho_margin > 0);
    CHECK(rho_deficit<Wide>(n, r.m, r.log_m, r.rho) > 0);
    CHECK(rho_deficit<Wide>(n, r.m, r.log_m, r.rho_upper) <= 0);
    CHECK(r.rho_upper / r.rho - 1 < Wide(1e-8));
    CHECK(r.k <= r.M);
    CHECK(r.beta > 0);
    CHECK(r.beta < 1);
    // A slightly smaller base fails the grid inequality.
    const auto smaller = grid_eval<Wide>(n, exp(r.log_m * (1 - Wide(1e-6))), r.log_m * (1 - Wide(1e-6)), Wide(r.alpha));
    CHECK_FALSE(smaller.accept);
  }
}

TEST_CASE("constants are deterministic and serialize in extended precision") {
  const auto a = lemma2_constants(1);
  const auto b = lemma2_constants(1);
  CHECK(a.log_m == b.log_m);
  CHECK(a.rho == b.rho);
  CHECK(a.beta == b.beta);
  const auto j = to_json(a);
  CHECK(j["m"].is_string());
  CHECK(j["log10"]["m"].get<double>() == doctest::Approx(3557.46).epsilon(1e-5));
  CHECK(wide_str(Wide(1) / 3, 5) == "3.33333e-01");
}

TEST_CASE("regression of the error example") {
  const auto r = bourgain_error_regression(3, 1, 1'000'000);
  const Big a3(alpha_ledger<double>(3).alpha);
  const Big a1(alpha_ledger<double>(1).alpha);
  // Original analog: c_log / L - m^{-2} / (c_scale L); evaluated on a coarse
  // odd subgrid with a wide type, never near -3.
  Big best = 1e9;
  for (long long m = 7; m <= 1'000'000; m += 2 * 499) {
    const Big L = log(Big(m));
    const Big v = log(8 * a3) / L - pow(Big(m), -2) / (2 * a3 * L);
    if (v < best) best = v;
  }
  CHECK(r.original_min <= static_cast<double>(best) + 1e-12);
  CHECK(r.original_min > -3.0);
  CHECK_FALSE(r.original_ever_below);
  // The corrected left side decreases in L; its minimum on the range sits at the largest odd m.
  const Big Lmax = log(Big(999'999));
  const Big cmin = log(8 * a1) / Lmax - Lmax / (2 * a1);
  CHECK(r.corrected_min_in_range == doctest::Approx(static_cast<double>(cmin)).epsilon(1e-12));
  CHECK_FALSE(r.corrected_in_range);
  // Root of L^2 - 6 alpha L - 2 alpha ln(8 alpha) = 0.
  const Big root = 3 * a1 + sqrt(9 * a1 * a1 + 2 * a1 * log(8 * a1));
  CHECK(r.corrected_threshold_log_m == doctest::Approx(static_cast<double>(root)).epsilon(1e-13));
  CHECK(r.corrected_succeeds);
  CHECK(r.corrected_at_threshold < -3.0);
  CHECK_THROWS(bourgain_error_regression(3, 1, 5));
}

#pragma once

#include "caloric/heat_kernel.hpp"

#include "json.hpp"

#include <boost/math/special_functions/expm1.hpp>
#include <boost/math/special_functions/log1p.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <string>

namespace caloric {

// Wide exponent range: the selected grids reach m ~ e^{10^7}.
using Wide = boost::multiprecision::cpp_bin_float_50;

// Explicit constants behind the alternative, factor by factor.
template <typename Scalar>
struct AlphaLedgerT {
  int n = 1;
  // Vertical-trace bound: W <= vertical_trace * lambda^{-n} off a dist_infty ball of radius lambda.
  Scalar vertical_trace;
  // u <= e1 * m^rho / (1 - m^{n-rho}) * (eps r)^{rho-n} off the support.
  Scalar e1;
  Scalar frostman_c;
  Scalar e2;
  Scalar e3;
  Scalar gap;
  // Content <= alternative * m^rho / (1 - m^{n-rho}) * eta * (eps r)^rho when the measure is small.
  Scalar alternative;
  // Bound on 1 / (1 - m^{n-rho'}) for rho' >= n+1.
  Scalar content_factor;
  Scalar alpha;
};

template <typename Scalar>
AlphaLedgerT<Scalar> alpha_ledger(int n) {
  using std::exp;
  using std::pow;
  if (n < 1) throw std::invalid_argument("alpha_ledger: n must be >= 1");
  const Scalar pi = detail::pi<Scalar>();
  const Scalar nn(n);
  AlphaLedgerT<Scalar> a;
  a.n = n;
  const Scalar near = pow(Scalar(2), nn) * C_n<Scalar>(n);
  const Scalar far = pow(2 * pi, -nn / 2);
  a.vertical_trace = near > far ? near : far;
  // Annuli plus the part of K outside the innermost ball.
  a.e1 = 2 * pow(Scalar(3), nn + 1) * a.vertical_trace;
  a.frostman_c = pow(Scalar(2), -(nn + 1));
  a.e2 = pow(12 * pi, -nn / 2) * exp(-nn / 12);
  a.e3 = pow(12 * pi, -nn / 2) * exp(-nn / 2);
  a.gap = a.e2 - a.e3;
  a.alternative = a.e1 / (a.frostman_c * a.gap);
  a.content_factor = Scalar(2);
  a.alpha = a.content_factor * a.alternative;
  return a;
}

using AlphaLedger = AlphaLedgerT<double>;

nlohmann::json to_json(const AlphaLedger& a);

// Left side of the grid inequality at base m and its pieces; valid while k <= M.
template <typename Scalar>
struct GridEval {
  Scalar m;
  Scalar L;
  Scalar q;
  Scalar eta;
  Scalar delta_frac;
  Scalar second;
  Scalar lhs;
  bool k_ok = false;
  bool accept = false;
};

template <typename Scalar>
GridEval<Scalar> grid_eval(int n, const Scalar& m, const Scalar& L, const Scalar& alpha) {
  using boost::math::expm1;
  using boost::math::log1p;
  using std::ceil;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sqrt;
  const int a = n + 2;
  GridEval<Scalar> g;
  g.m = m;
  g.L = L;
  g.q = ceil(L * L);
  const Scalar ma = pow(m, a);
  g.eta = 1 / (ma * 2 * alpha);
  g.k_ok = 2 * g.q <= m - 1 / ma;
  if (!g.k_ok) return g;
  g.delta_frac = -expm1(Scalar(n) * log1p(-2 * g.q / m) + log1p(-2 * g.q / pow(m, n + 4)));
  g.second = exp((-log(g.eta) + g.q * ma * log1p(-g.eta)) / 2);
  g.lhs = sqrt(g.delta_frac) + g.second;
  g.accept = g.delta_frac < Scalar(0.5) && g.lhs < 1;
  return g;
}

// 1 - (left side of the rho condition), evaluated without cancellation.
template <typename Scalar>
Scalar rho_deficit(int n, const Scalar& m, const Scalar& L, const Scalar& rho) {
  using boost::math::expm1;
  using std::pow;
  const int a = n + 2;
  const int d = n + 3;
  const Scalar tail = pow(m, -(d + 1) * a) / 2;
  Scalar s = 0;
  for (int i = 1; i <= d + 1; ++i) s += pow(m, -i * a) * expm1(Scalar(i) * rho * L);
  return tail - (pow(m, a) - 1) * s - tail * expm1(Scalar(d) * rho * L);
}

// Left side of the rho condition evaluated directly.
template <typename Scalar>
Scalar rho_stip_lhs(int n, const Scalar& m, const Scalar& rho) {
  using std::pow;
  const int a = n + 2;
  const int d = n + 3;
  Scalar s = 0;
  for (int i = 1; i <= d + 1; ++i) s += pow(m, -Scalar(i) * (a - rho));
  return (pow(m, a) - 1) * s + pow(m, -a) * pow(m, -Scalar(d) * (a - rho)) / 2;
}

struct ConstantsReport {
  int n = 1;
  int d = 4;
  // "exact" when m is an odd integer <= 10^6, "asymptotic" when found by a
  // search over log m beyond that range.
  std::string search;
  Wide m;
  Wide log_m;
  Wide q;  // k / m^{d-1}
  Wide k;
  Wide c;
  Wide M;
  Wide eta;
  double alpha = 0.0;
  Wide rho;
  Wide rho_upper;  // bracket end failing the rho condition
  Wide lambda;
  Wide delta_frac;
  Wide less_than_1;
  Wide rho_margin;  // 1 - left side at rho
  Wide beta;
  AlphaLedger ledger;
};

ConstantsReport lemma2_constants(int n);
nlohmann::json to_json(const ConstantsReport& r);
std::string wide_str(const Wide& x, int digits = 12);

struct RegressionReport {
  int n_analog = 3;
  int n_corrected = 1;
  double c_log = 0.0;     // ln(8 alpha) of the analog
  double c_scale = 0.0;   // 2 alpha of the analog
  double original_min = 0.0;
  long long original_argmin = 0;
  bool original_ever_below = false;
  double corrected_min_in_range = 0.0;
  bool corrected_in_range = false;
  long long corrected_first_in_range = 0;
  double corrected_threshold_log_m = 0.0;
  double corrected_at_threshold = 0.0;
  bool corrected_succeeds = false;
  long long m_max = 1'000'000;
};

// The analog inequality for the k ~ m choice and the corrected k choice.
double original_analog_lhs(double m, double c_log, double c_scale);
double corrected_lhs(double log_m, double alpha);

RegressionReport bourgain_error_regression(int n_analog = 3, int n_corrected = 1, long long m_max = 1'000'000);
nlohmann::json to_json(const RegressionReport& r);

}  // namespace caloric

#include "caloric/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace caloric {

namespace {

constexpr long long kExactMax = 1'000'000;

// Largest rho in (0, 1) with a positive deficit, to relative width tol.
std::pair<Wide, Wide> solve_rho(int n, const Wide& m, const Wide& L, double tol) {
  using std::pow;
  const int a = n + 2;
  const int d = n + 3;
  // First order: deficit ~ tail - rho L (slope sum).
  Wide slope = 0;
  for (int i = 1; i <= d + 1; ++i) slope += Wide(i) * pow(m, -i * a);
  slope *= pow(m, a) - 1;
  const Wide tail = pow(m, -(d + 1) * a) / 2;
  slope += tail * d;
  Wide rho0 = tail / (L * slope);
  if (rho0 >= 1) rho0 = Wide(0.5);
  Wide lo = rho0 / 2;
  Wide hi = rho0 * 2;
  if (hi > 1) hi = Wide(1);
  int guard = 0;
  while (rho_deficit(n, m, L, lo) <= 0) {
    hi = lo;
    lo /= 2;
    if (++guard > 4000) throw std::runtime_error("solve_rho: no positive deficit");
  }
  while (hi < 1 && rho_deficit(n, m, L, hi) > 0) {
    lo = hi;
    hi = hi * 2 > 1 ? Wide(1) : hi * 2;
    if (++guard > 4000) throw std::runtime_error("solve_rho: bracket failed");
  }
  while (hi / lo - 1 > tol) {
    const Wide mid = (lo + hi) / 2;
    if (rho_deficit(n, m, L, mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

void fill(ConstantsReport& r, const GridEval<Wide>& g) {
  using std::exp;
  using std::log;
  using std::pow;
  const int n = r.n;
  r.m = g.m;
  r.log_m = g.L;
  r.q = g.q;
  r.k = g.q * pow(g.m, n + 2);
  // Round-up amount c = k - ceil(m^{n+2} L^2); exact only while m^{n+2} fits the mantissa.
  const Wide ma = pow(g.m, n + 2);
  r.c = ma < Wide(1e40) ? r.k - ceil(ma * g.L * g.L) : ma * (g.q - g.L * g.L);
  r.M = (pow(g.m, n + 3) - 1) / 2;
  r.eta = g.eta;
  r.delta_frac = g.delta_frac;
  r.less_than_1 = g.lhs;
  r.lambda = -log(g.lhs) / g.L;
  auto [lo, hi] = solve_rho(n, g.m, g.L, 1e-9);
  r.rho = lo;
  r.rho_upper = hi;
  r.rho_margin = rho_deficit(n, g.m, g.L, lo);
  r.beta = r.lambda * r.rho / (r.lambda + r.rho);
}

}  // namespace

nlohmann::json to_json(const AlphaLedger& a) {
  return {{"n", a.n},
          {"vertical_trace", a.vertical_trace},
          {"e1", a.e1},
          {"frostman_c", a.frostman_c},
          {"e2", a.e2},
          {"e3", a.e3},
          {"gap", a.gap},
          {"alternative", a.alternative},
          {"content_factor", a.content_factor},
          {"alpha", a.alpha}};
}

std::string wide_str(const Wide& x, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << std::scientific << x;
  return os.str();
}

ConstantsReport lemma2_constants(int n) {
  if (n < 1) throw std::invalid_argument("lemma2_constants: n must be >= 1");
  ConstantsReport r;
  r.n = n;
  r.d = n + 3;
  r.ledger = alpha_ledger<double>(n);
  r.alpha = r.ledger.alpha;
  const Wide alpha = alpha_ledger<Wide>(n).alpha;

  long long m0 = static_cast<long long>(std::ceil(1 + 2 * std::sqrt(6.0 * n)));
  if (m0 % 2 == 0) ++m0;
  for (long long m = std::max(7LL, m0); m <= kExactMax; m += 2) {
    const double md = static_cast<double>(m);
    const auto g = grid_eval<double>(n, md, std::log(md), r.alpha);
    if (!g.accept) continue;
    const Wide mw(m);
    const auto gw = grid_eval<Wide>(n, mw, log(mw), alpha);
    if (!gw.accept) continue;
    r.search = "exact";
    fill(r, gw);
    return r;
  }

  // Beyond the integer range the conditions are monotone in log m; bracket and bisect.
  auto accept = [&](const Wide& L) { return grid_eval<Wide>(n, exp(L), L, alpha).accept; };
  Wide lo = log(Wide(kExactMax));
  Wide hi = lo;
  while (!accept(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > Wide(1e12)) throw std::runtime_error("lemma2_constants: search exhausted");
  }
  while (hi / lo - 1 > Wide(1e-12)) {
    const Wide mid = (lo + hi) / 2;
    if (accept(mid))
      hi = mid;
    else
      lo = mid;
  }
  r.search = "asymptotic";
  fill(r, grid_eval<Wide>(n, exp(hi), hi, alpha));
  return r;
}

nlohmann::json to_json(const ConstantsReport& r) {
  auto w = [](const Wide& x) { return wide_str(x); };
  auto l10 = [](const Wide& x) { return x > 0 ? static_cast<double>(log10(x)) : -std::numeric_limits<double>::infinity(); };
  return {{"n", r.n},
          {"d", r.d},
          {"search", r.search},
          {"m", w(r.m)},
          {"log_m", static_cast<double>(r.log_m)},
          {"q", w(r.q)},
          {"k", w(r.k)},
          {"c", w(r.c)},
          {"M", w(r.M)},
          {"eta", w(r.eta)},
          {"alpha", r.alpha},
          {"rho", w(r.rho)},
          {"rho_upper", w(r.rho_upper)},
          {"lambda", w(r.lambda)},
          {"delta_frac", w(r.delta_frac)},
          {"less_than_1", w(r.less_than_1)},
          {"rho_margin", w(r.rho_margin)},
          {"beta", w(r.beta)},
          {"log10",
           {{"m", l10(r.m)},
            {"c", l10(r.c)},
            {"eta", l10(r.eta)},
            {"rho", l10(r.rho)},
            {"lambda", l10(r.lambda)},
            {"beta", l10(r.beta)},
            {"rho_margin", l10(r.rho_margin)}}},
          {"alpha_ledger", to_json(r.ledger)}};
}

double original_analog_lhs(double m, double c_log, double c_scale) {
  const double L = std::log(m);
  return c_log / L - (std::pow(m, -3.0) / c_scale) * (m / L);
}

double corrected_lhs(double log_m, double alpha) {
  return std::log(8 * alpha) / log_m - log_m / (2 * alpha);
}

RegressionReport bourgain_error_regression(int n_analog, int n_corrected, long long m_max) {
  if (m_max < 7) throw std::invalid_argument("bourgain_error_regression: m_max < 7");
  RegressionReport r;
  r.n_analog = n_analog;
  r.n_corrected = n_corrected;
  r.m_max = m_max;
  const double a3 = alpha_ledger<double>(n_analog).alpha;
  r.c_log = std::log(8 * a3);
  r.c_scale = 2 * a3;
  r.original_min = std::numeric_limits<double>::infinity();
  const double alpha = alpha_ledger<double>(n_corrected).alpha;
  const double bound = -(n_corrected + 2.0);
  r.corrected_min_in_range = std::numeric_limits<double>::infinity();
  for (long long m = 7; m <= m_max; m += 2) {
    const double md = static_cast<double>(m);
    const double o = original_analog_lhs(md, r.c_log, r.c_scale);
    if (o < r.original_min) {
      r.original_min = o;
      r.original_argmin = m;
    }
    if (o < -3.0) r.original_ever_below = true;
    const double c = corrected_lhs(std::log(md), alpha);
    r.corrected_min_in_range = std::min(r.corrected_min_in_range, c);
    if (c < bound && !r.corrected_in_range) {
      r.corrected_in_range = true;
      r.corrected_first_in_range = m;
    }
  }
  const double b = alpha * (n_corrected + 2.0);
  r.corrected_threshold_log_m = b + std::sqrt(b * b + 2 * alpha * std::log(8 * alpha));
  r.corrected_at_threshold = corrected_lhs(r.corrected_threshold_log_m * (1 + 1e-9), alpha);
  r.corrected_succeeds = r.corrected_at_threshold < bound;
  return r;
}

nlohmann::json to_json(const RegressionReport& r) {
  return {{"n_analog", r.n_analog},
          {"n_corrected", r.n_corrected},
          {"m_max", r.m_max},
          {"c_log", r.c_log},
          {"c_scale", r.c_scale},
          {"original_min", r.original_min},
          {"original_argmin", r.original_argmin},
          {"original_ever_below", r.original_ever_below},
          {"corrected_min_in_range", r.corrected_min_in_range},
          {"corrected_in_range", r.corrected_in_range},
          {"corrected_first_in_range", r.corrected_first_in_range},
          {"corrected_threshold_log_m", r.corrected_threshold_log_m},
          {"corrected_at_threshold", r.corrected_at_threshold},
          {"corrected_succeeds", r.corrected_succeeds}};
}

}  // namespace caloric

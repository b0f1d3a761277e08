#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace caloric {

namespace detail {

// Resolves to std:: for builtin types and to ADL overloads for multiprecision.
template <typename Scalar>
Scalar pi() {
  using std::acos;
  return acos(Scalar(-1));
}

}  // namespace detail

// log of (4 pi t)^{-n/2} exp(-r2 / 4t), t > 0.
template <typename Scalar>
Scalar log_phi_sq(const Scalar& r2, const Scalar& t, int n) {
  using std::log;
  return -Scalar(n) / 2 * log(4 * detail::pi<Scalar>() * t) - r2 / (4 * t);
}

template <typename Scalar>
Scalar phi(const Scalar& r, const Scalar& t, int n) {
  using std::exp;
  if (n < 1) throw std::invalid_argument("phi: n must be >= 1");
  if (!(t > 0)) throw std::invalid_argument("phi: t must be positive");
  return exp(log_phi_sq<Scalar>(r * r, t, n));
}

template <typename Derived>
typename Derived::Scalar W(const Eigen::MatrixBase<Derived>& x, const typename Derived::Scalar& t) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  if (!(t > 0)) return Scalar(0);
  return exp(log_phi_sq<Scalar>(x.squaredNorm(), t, static_cast<int>(x.size())));
}

template <typename Scalar>
Scalar phi_argmax_t(const Scalar& r, int n) {
  if (!(r > 0)) throw std::invalid_argument("phi_argmax_t: r must be positive");
  return r * r / (2 * n);
}

template <typename Scalar>
Scalar C_n(int n) {
  using std::exp;
  using std::pow;
  const Scalar nn(n);
  return pow(nn / (2 * detail::pi<Scalar>()), nn / 2) * exp(-nn / 2);
}

template <typename Scalar>
Scalar phi_max(const Scalar& r, int n) {
  using std::pow;
  if (!(r > 0)) throw std::invalid_argument("phi_max: r must be positive");
  return C_n<Scalar>(n) * pow(r, -Scalar(n));
}

template <typename Scalar>
Scalar C_lambda(const Scalar& lambda, int n) {
  using std::exp;
  using std::pow;
  if (!(lambda > 0)) throw std::invalid_argument("C_lambda: lambda must be positive");
  return pow(4 * detail::pi<Scalar>() * lambda, -Scalar(n) / 2) * exp(-1 / (4 * lambda));
}

// Golden-section search for the maximizer of a unimodal f on [a, b].
template <typename Scalar>
Scalar golden_section_argmax(const std::function<Scalar(const Scalar&)>& f, Scalar a, Scalar b,
                             const Scalar& abs_tol, int max_iter = 100000) {
  using std::abs;
  using std::sqrt;
  const Scalar g = (sqrt(Scalar(5)) - 1) / 2;
  Scalar c = b - g * (b - a);
  Scalar d = a + g * (b - a);
  Scalar fc = f(c);
  Scalar fd = f(d);
  for (int it = 0; it < max_iter && abs(b - a) > abs_tol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

// Maximizes t -> log phi(r, t) over log t, bracketing by the scale r^2 only.
// rel_tol bounds the relative error of the returned t.
template <typename Scalar>
Scalar numeric_phi_argmax_t(const Scalar& r, int n, const Scalar& rel_tol) {
  using std::exp;
  using std::log;
  const Scalar r2 = r * r;
  const Scalar c = log(r2);
  std::function<Scalar(const Scalar&)> f = [&](const Scalar& s) {
    return log_phi_sq<Scalar>(r2, exp(s), n);
  };
  const Scalar s = golden_section_argmax<Scalar>(f, c - 30, c + 30, rel_tol / 4);
  return exp(s);
}

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;  // for weight exp(-x^2)
};

// Golub-Welsch on the Hermite Jacobi matrix.
GaussHermite gauss_hermite(int points);

struct QuadSpec {
  int points = 40;
  // Nodes are placed at scale * sqrt(4t) * x_i so the integrand is not the
  // quadrature weight itself.
  double scale = 1.25;
};

double normalization_check(int n, double t, const QuadSpec& q = {});

}  // namespace caloric

#include "caloric/heat_kernel.hpp"

#include <Eigen/Eigenvalues>

namespace caloric {

GaussHermite gauss_hermite(int points) {
  if (points < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int i = 1; i < points; ++i) {
    const double b = std::sqrt(0.5 * i);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw std::runtime_error("gauss_hermite: eigensolver failed");
  GaussHermite gh;
  const double sqrt_pi = std::sqrt(detail::pi<double>());
  for (int i = 0; i < points; ++i) {
    gh.nodes.push_back(es.eigenvalues()[i]);
    const double v = es.eigenvectors()(0, i);
    gh.weights.push_back(sqrt_pi * v * v);
  }
  return gh;
}

double normalization_check(int n, double t, const QuadSpec& q) {
  if (n < 1) throw std::invalid_argument("normalization_check: n must be >= 1");
  if (!(t > 0.0)) return 0.0;
  if (q.points < 2 || !(q.scale > 0.0)) throw std::invalid_argument("normalization_check: bad quadrature");
  const GaussHermite gh = gauss_hermite(q.points);
  const double a = q.scale * std::sqrt(4.0 * t);
  std::vector<int> idx(n, 0);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    double x2 = 0.0;
    for (int i = 0; i < n; ++i) {
      w *= gh.weights[idx[i]];
      x2 += gh.nodes[idx[i]] * gh.nodes[idx[i]];
    }
    total += w * std::exp(log_phi_sq<double>(a * a * x2, t, n) + x2);
    int i = n - 1;
    while (i >= 0 && ++idx[i] == q.points) idx[i--] = 0;
    if (i < 0) break;
  }
  total *= std::pow(a, n);
  if (!std::isfinite(total)) throw std::runtime_error("normalization_check: quadrature failure");
  return total;
}

}  // namespace caloric

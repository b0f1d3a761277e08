#include "caloric/audits.hpp"

#include "caloric/heat_kernel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace caloric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kContinuationSalt = 0x9E3779B97F4A7C15ULL;

double slack_sigma(const MCEstimate& e) { return e.std_error; }

void require_on_boundary(const SpaceTimeDomain& d, const SpaceTimePoint& p, const char* what) {
  if (d.boundary_distance(p) > 1e-9) throw std::invalid_argument(std::string(what) + " is not on the essential boundary");
}

// Face sample points of a closed box: top face and lateral faces.
std::vector<SpaceTimePoint> face_grid(const Box& b, int g) {
  const int n = b.dim();
  std::vector<SpaceTimePoint> out;
  auto frac = [g](int j) { return (j + 0.5) / g; };
  std::vector<int> idx(n, 0);
  // Top face: g^n spatial points.
  while (true) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = b.lo[i] + frac(idx[i]) * (b.hi[i] - b.lo[i]);
    out.emplace_back(x, b.t_hi);
    int i = n - 1;
    while (i >= 0 && ++idx[i] == g) idx[i--] = 0;
    if (i < 0) break;
  }
  // Lateral faces: the fixed coordinate sits on a wall, the others and time on the grid.
  for (int fixed = 0; fixed < n; ++fixed) {
    for (int side = 0; side < 2; ++side) {
      std::vector<int> k(n, 0);
      while (true) {
        Vector x(n);
        for (int i = 0, c = 0; i < n; ++i) {
          if (i == fixed) {
            x[i] = side ? b.hi[i] : b.lo[i];
          } else {
            x[i] = b.lo[i] + frac(k[c++]) * (b.hi[i] - b.lo[i]);
          }
        }
        out.emplace_back(x, b.t_lo + frac(k[n - 1]) * (b.t_hi - b.t_lo));
        int i = n - 1;
        while (i >= 0 && ++k[i] == g) k[i--] = 0;
        if (i < 0) break;
      }
    }
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const MCEstimate& e) {
  return {{"mean", e.mean}, {"stderr", e.std_error}, {"N", e.n}, {"seed", e.seed}, {"hits", e.hits}};
}

nlohmann::json AuditRecord::to_json() const {
  return {{"name", name}, {"estimate", caloric::to_json(estimate)}, {"bound", bound},
          {"sigma", sigma}, {"pass", pass}, {"detail", detail}};
}

double cylinder_bound(const SpaceTimePoint& pole, const SpaceTimePoint& center, double r, double s) {
  const int n = pole.dim();
  if (!(r > 0.0) || !(s > 0.0)) throw std::invalid_argument("cylinder_bound: r and s must be positive");
  const double tau = r * r / (2.0 * n) + s + pole.t - center.t;
  const Vector dx = pole.x - center.x;
  return W(dx, tau) / phi(1.0, 1.0 / (2.0 * n) + 2.0 * s / (r * r), n) * std::pow(r, n);
}

double ball_constant(int n) {
  const double pi = detail::pi<double>();
  return std::max(C_n<double>(n), std::pow(4.0 * pi, -0.5 * n)) / phi(1.0, 1.0 / (2.0 * n) + 2.0, n);
}

PointTarget in_cylinder(const SpaceTimePoint& center, double r, double s) {
  return [center, r, s](const SpaceTimePoint& p) {
    return (p.x - center.x).norm() < r && p.t > center.t - s && p.t < center.t + s;
  };
}

AuditRecord check_cylinder_estimate(const SpaceTimeDomain& domain, const SpaceTimePoint& pole,
                                    const SpaceTimePoint& center, double r, double s, std::int64_t n,
                                    const WalkConfig& cfg) {
  require_on_boundary(domain, center, "cylinder center");
  AuditRecord rec;
  rec.name = "cylinder_estimate";
  rec.bound = cylinder_bound(pole, center, r, s);
  rec.estimate = estimate_caloric(domain, pole, targets::at_point(in_cylinder(center, r, s)), n, cfg);
  rec.sigma = slack_sigma(rec.estimate);
  rec.pass = rec.estimate.mean <= rec.bound + 3.0 * rec.sigma;
  rec.detail = {{"r", r}, {"s", s}, {"trivial", rec.bound >= 1.0}};
  return rec;
}

AuditRecord check_ball_estimate(const SpaceTimeDomain& domain, const SpaceTimePoint& pole,
                                const SpaceTimePoint& center, double r, std::int64_t n, const WalkConfig& cfg) {
  require_on_boundary(domain, center, "ball center");
  const double dist = domain.boundary_distance(pole);
  if (!(r > 0.0) || r > dist) throw std::invalid_argument("check_ball_estimate: need 0 < r <= dist(pole, boundary)");
  AuditRecord rec;
  rec.name = "ball_estimate";
  const int dim = pole.dim();
  rec.bound = ball_constant(dim) * std::pow(r / dist, dim);
  rec.estimate = estimate_caloric(domain, pole, targets::at_point(in_cylinder(center, r, r * r)), n, cfg);
  rec.sigma = slack_sigma(rec.estimate);
  rec.pass = rec.estimate.mean <= rec.bound + 3.0 * rec.sigma;
  rec.detail = {{"r", r}, {"dist", dist}, {"K_n", ball_constant(dim)}, {"trivial", rec.bound >= 1.0}};
  return rec;
}

AuditRecord strong_markov_residual(const SpaceTimeDomain& omega1, const SpaceTimeDomain& omega2,
                                   const SpaceTimePoint& pole, const PointTarget& target, std::int64_t n,
                                   const WalkConfig& cfg) {
  if (!omega1.nested_in(omega2)) throw std::invalid_argument("strong_markov_residual: domains are not nested");
  if (!omega1.contains(pole)) throw std::invalid_argument("strong_markov_residual: pole outside the inner domain");
  const bool same = omega1 == omega2;
  WalkConfig cont = cfg;
  cont.seed = cfg.seed ^ kContinuationSalt;

  std::atomic<std::int64_t> direct{0}, term1{0}, term2{0}, continued{0};
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    std::int64_t d = 0, t1 = 0, t2 = 0, c = 0;
    for (std::int64_t i = b; i < e; ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      if (target(simulate_exit(omega2, pole, cfg, idx).exit)) ++d;
      const ExitSample first = simulate_exit(omega1, pole, cfg, idx);
      const bool inside = !same && omega2.contains(first.exit) &&
                          omega2.boundary_distance(first.exit) > cfg.bisection_tol;
      if (!inside) {
        if (target(first.exit)) ++t1;
      } else {
        ++c;
        if (target(simulate_exit(omega2, first.exit, cont, idx).exit)) ++t2;
      }
    }
    direct += d;
    term1 += t1;
    term2 += t2;
    continued += c;
  });
  const MCEstimate est_direct = make_estimate(direct.load(), n, cfg.seed);
  const MCEstimate est_split = make_estimate(term1.load() + term2.load(), n, cfg.seed);
  AuditRecord rec;
  rec.name = "strong_markov";
  rec.estimate = est_direct;
  rec.bound = est_split.mean;
  rec.sigma = std::hypot(est_direct.std_error, est_split.std_error);
  const double residual = std::abs(est_direct.mean - est_split.mean);
  rec.pass = residual <= 3.0 * rec.sigma;
  rec.detail = {{"direct", to_json(est_direct)},
                {"split", to_json(est_split)},
                {"term1", static_cast<double>(term1.load()) / n},
                {"term2", static_cast<double>(term2.load()) / n},
                {"continued_fraction", static_cast<double>(continued.load()) / n},
                {"residual", residual}};
  return rec;
}

AuditRecord nested_rectangle_bound(const SpaceTimeDomain& domain, const std::vector<ParabolicRectangle>& h,
                                   const SpaceTimePoint& pole, std::int64_t n, const WalkConfig& cfg,
                                   const PoleGrid& grid) {
  const std::size_t k = h.size();
  if (k == 0) throw std::invalid_argument("nested_rectangle_bound: need at least one rectangle");
  for (std::size_t i = 1; i < k; ++i)
    if (!h[i].inside_interior_of(h[i - 1])) throw std::invalid_argument("nested_rectangle_bound: rectangles not strictly nested");
  if (h[0].contains(pole)) throw std::invalid_argument("nested_rectangle_bound: pole inside H_1");
  if (grid.per_axis < 1) throw std::invalid_argument("nested_rectangle_bound: empty pole grid");

  const Box hk = h[k - 1].box();
  AuditRecord rec;
  rec.name = "nested_rectangles";
  rec.estimate = estimate_caloric(domain, pole, targets::at_point(targets::in_box(hk)), n, cfg);

  // Exit through the added rectangle (last obstacle) at a point of the original domain.
  auto g_prime = [&domain](int obstacle) {
    return [&domain, obstacle](const ExitSample& s) {
      return targets::obstacle(obstacle)(s) && domain.contains(s.exit);
    };
  };

  const int base = static_cast<int>(domain.obstacles().size());
  const SpaceTimeDomain first_domain = domain.with_obstacle(h[0]);
  const Target first_target = (k == 1) ? targets::at_point(targets::in_box(h[0].box())) : Target(g_prime(base));
  const MCEstimate first = estimate_caloric(first_domain, pole, first_target, n, cfg);

  double bound = first.mean;
  double rel2 = first.mean > 0.0 ? std::pow(first.std_error / first.mean, 2) : 0.0;
  nlohmann::json factors = nlohmann::json::array();
  factors.push_back({{"factor", "first"}, {"estimate", to_json(first)}});
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const SpaceTimeDomain di = domain.with_obstacle(h[i + 1]);
    const bool last = (i + 2 == k);
    const Target ti = last ? targets::at_point(targets::in_box(h[i + 1].box())) : Target(g_prime(base));
    MCEstimate sup;
    SpaceTimePoint argsup;
    int poles = 0;
    for (const auto& p : face_grid(h[i].box(), grid.per_axis)) {
      if (!di.contains(p)) continue;
      ++poles;
      const MCEstimate e = estimate_caloric(di, p, ti, n, cfg);
      if (poles == 1 || e.mean > sup.mean) {
        sup = e;
        argsup = p;
      }
    }
    if (poles == 0) throw std::invalid_argument("nested_rectangle_bound: no grid pole lies in the domain");
    bound *= sup.mean;
    if (sup.mean > 0.0) rel2 += std::pow(sup.std_error / sup.mean, 2);
    factors.push_back({{"factor", "sup"}, {"index", i + 1}, {"poles", poles},
                       {"argsup", {{"x", std::vector<double>(argsup.x.data(), argsup.x.data() + argsup.dim())}, {"t", argsup.t}}},
                       {"estimate", to_json(sup)}});
  }
  rec.bound = bound;
  rec.sigma = std::hypot(rec.estimate.std_error, bound * std::sqrt(rel2));
  rec.pass = rec.estimate.mean <= rec.bound + 3.0 * rec.sigma;
  rec.detail = {{"k", k}, {"grid_per_axis", grid.per_axis}, {"factors", factors}};
  return rec;
}

MCEstimate walk_on_spheres(const Footprint& d, const Vector& x0, const SpatialTarget& target, std::int64_t n,
                           const WosConfig& cfg) {
  if (n < 1) throw std::invalid_argument("walk_on_spheres: N must be >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("walk_on_spheres: tol must be positive");
  const SpaceTimeDomain probe(d, -kInf, kInf);
  if (!probe.in_footprint(x0)) throw std::invalid_argument("walk_on_spheres: start outside the domain");
  const int dim = static_cast<int>(x0.size());

  // Distance to the boundary and the nearest boundary point.
  auto nearest = [&d, dim](const Vector& x, Vector& proj) {
    if (auto* b = std::get_if<SpatialBox>(&d)) {
      double best = kInf;
      int arg = 0;
      bool hi = false;
      for (int i = 0; i < dim; ++i) {
        if (x[i] - b->lo[i] < best) best = x[i] - b->lo[i], arg = i, hi = false;
        if (b->hi[i] - x[i] < best) best = b->hi[i] - x[i], arg = i, hi = true;
      }
      proj = x;
      proj[arg] = hi ? b->hi[arg] : b->lo[arg];
      return best;
    }
    const auto& s = std::get<SpatialBall>(d);
    const Vector v = x - s.center;
    const double r = v.norm();
    proj = r > 0.0 ? Vector(s.center + s.radius * v / r) : Vector(s.center + s.radius * Vector::Unit(dim, 0));
    return s.radius - r;
  };

  std::atomic<std::int64_t> hits{0};
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    std::int64_t local = 0;
    for (std::int64_t i = b; i < e; ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal;
      Vector x = x0, proj(dim), u(dim);
      std::int64_t jumps = 0;
      while (true) {
        const double r = nearest(x, proj);
        if (r < cfg.tol) break;
        if (++jumps > cfg.max_jumps) throw std::runtime_error("walk_on_spheres: no convergence");
        double norm = 0.0;
        while (norm == 0.0) {
          for (int k = 0; k < dim; ++k) u[k] = normal(rng);
          norm = u.norm();
        }
        x += r * u / norm;
      }
      if (target(proj)) ++local;
    }
    hits += local;
  });
  return make_estimate(hits.load(), n, cfg.seed);
}

AuditRecord cylinder_projection_check(const Footprint& d, const Vector& x, const SpatialTarget& target,
                                      std::int64_t n, const WalkConfig& cfg, const WosConfig& wos) {
  const SpaceTimeDomain cyl(d, -kInf, kInf);
  const SpaceTimePoint pole(x, 0.0);
  AuditRecord rec;
  rec.name = "cylinder_projection";
  rec.estimate = estimate_caloric(cyl, pole, [&target](const ExitSample& s) { return target(s.exit.x); }, n, cfg);
  const MCEstimate h = walk_on_spheres(d, x, target, n, wos);
  rec.bound = h.mean;
  rec.sigma = std::hypot(rec.estimate.std_error, h.std_error);
  rec.pass = std::abs(rec.estimate.mean - h.mean) <= 3.0 * rec.sigma;
  rec.detail = {{"harmonic", to_json(h)}, {"difference", rec.estimate.mean - h.mean}};
  return rec;
}

}  // namespace caloric

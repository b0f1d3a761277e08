#include "caloric/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace caloric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::atomic<int> g_threads{0};

struct Hit {
  double tau = kInf;
  Vector point;
  ExitTag tag;
};

void consider(Hit& best, double tau, Vector point, ExitTag tag) {
  if (tau < best.tau) {
    best.tau = tau;
    best.point = std::move(point);
    best.tag = tag;
  }
}

double bridge_probability(double d0, double d1, double kappa, double h) {
  const double a = d0 * d1 / (kappa * h);
  return a > 700.0 ? 0.0 : std::exp(-a);
}

// Euclidean distance from x to the closed box [lo, hi].
double box_distance(const Vector& x, const Vector& lo, const Vector& hi) {
  return (x.cwiseMax(lo).cwiseMin(hi) - x).norm();
}

std::mt19937_64 walk_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

class Walker {
 public:
  Walker(const SpaceTimeDomain& d, const WalkConfig& cfg, std::mt19937_64& rng)
      : d_(d), cfg_(cfg), rng_(rng), n_(d.dim()) {}

  void container_box(Hit& best, const SpatialBox& b, const Vector& x, const Vector& xn, double h) {
    for (int i = 0; i < n_; ++i) {
      for (int side = 0; side < 2; ++side) {
        const double wall = side ? b.hi[i] : b.lo[i];
        const double d0 = side ? wall - x[i] : x[i] - wall;
        const double d1 = side ? wall - xn[i] : xn[i] - wall;
        double tau = kInf;
        if (d1 <= 0.0) {
          tau = d0 / (d0 - d1);
        } else if (unif_(rng_) < bridge_probability(d0, d1, cfg_.diffusivity, h)) {
          tau = d0 / (d0 + d1);
        }
        if (tau < best.tau) {
          Vector p = x + tau * (xn - x);
          p[i] = wall;
          consider(best, tau, std::move(p), {ExitKind::ContainerSide, -1, 2 * i + side});
        }
      }
    }
  }

  void container_ball(Hit& best, const SpatialBall& s, const Vector& x, const Vector& xn, double h) {
    const double d0 = s.radius - (x - s.center).norm();
    const double d1 = s.radius - (xn - s.center).norm();
    double tau = kInf;
    if (d1 <= 0.0) {
      double lo = 0.0, hi = 1.0;
      const double len = (xn - x).norm();
      while ((hi - lo) * len > cfg_.bisection_tol) {
        const double mid = 0.5 * (lo + hi);
        if ((x + mid * (xn - x) - s.center).norm() < s.radius)
          lo = mid;
        else
          hi = mid;
        if (hi - lo < 1e-17) break;
      }
      tau = hi;
    } else if (unif_(rng_) < bridge_probability(d0, d1, cfg_.diffusivity, h)) {
      tau = d0 / (d0 + d1);
    }
    if (tau < best.tau) {
      const Vector p = x + tau * (xn - x) - s.center;
      const double r = p.norm();
      Vector q = r > 0.0 ? Vector(s.center + s.radius * p / r) : Vector(s.center + s.radius * Vector::Unit(n_, 0));
      consider(best, tau, std::move(q), {ExitKind::ContainerSide, -1, 0});
    }
  }

  void obstacle_side(Hit& best, const Box& o, int idx, const Vector& x, const Vector& xn, double h) {
    // Liang-Barsky clip of the segment against the spatial box.
    double t0 = 0.0, t1 = 1.0;
    int face = -1;
    bool hits = true;
    for (int i = 0; i < n_ && hits; ++i) {
      const double dx = xn[i] - x[i];
      if (dx == 0.0) {
        if (x[i] < o.lo[i] || x[i] > o.hi[i]) hits = false;
        continue;
      }
      double a = (o.lo[i] - x[i]) / dx;
      double b = (o.hi[i] - x[i]) / dx;
      int fa = 2 * i, fb = 2 * i + 1;
      if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
      }
      if (a > t0) {
        t0 = a;
        face = fa;
      }
      t1 = std::min(t1, b);
      if (t0 > t1) hits = false;
    }
    if (hits && face >= 0) {
      if (t0 < best.tau) {
        Vector p = x + t0 * (xn - x);
        const int i = face / 2;
        p[i] = (face % 2) ? o.hi[i] : o.lo[i];
        consider(best, t0, std::move(p), {ExitKind::ObstacleSide, idx, face});
      }
      return;
    }
    const double d0 = box_distance(x, o.lo, o.hi);
    const double d1 = box_distance(xn, o.lo, o.hi);
    if (unif_(rng_) < bridge_probability(d0, d1, cfg_.diffusivity, h)) {
      const double tau = d0 / (d0 + d1);
      if (tau < best.tau) {
        const Vector p = x + tau * (xn - x);
        const Vector q = p.cwiseMax(o.lo).cwiseMin(o.hi);
        Eigen::Index i = 0;
        (p - q).cwiseAbs().maxCoeff(&i);
        const int f = 2 * static_cast<int>(i) + (p[i] > o.hi[i] ? 1 : 0);
        consider(best, tau, q, {ExitKind::ObstacleSide, idx, f});
      }
    }
  }

  ExitSample run(const SpaceTimePoint& pole) {
    const double dt = cfg_.dt > 0.0 ? cfg_.dt : d_.default_dt();
    const double sd_unit = std::sqrt(2.0 * cfg_.diffusivity);
    const auto& events = d_.event_times();
    const auto& obs = d_.obstacles();
    Vector x = pole.x;
    double t = pole.t;
    Vector xi(n_);
    Vector xn(n_);
    for (std::int64_t step = 1; step <= cfg_.max_steps; ++step) {
      double t_next = t - dt;
      auto it = std::lower_bound(events.begin(), events.end(), t);
      if (it != events.begin() && *(it - 1) >= t_next) t_next = *(it - 1);
      const double h = t - t_next;
      for (int i = 0; i < n_; ++i) xi[i] = normal_(rng_);
      xn.noalias() = x + (sd_unit * std::sqrt(h)) * xi;

      Hit best;
      if (auto* b = std::get_if<SpatialBox>(&d_.footprint()))
        container_box(best, *b, x, xn, h);
      else
        container_ball(best, std::get<SpatialBall>(d_.footprint()), x, xn, h);
      for (std::size_t k = 0; k < obs.size(); ++k)
        if (obs[k].t_lo <= t_next && obs[k].t_hi >= t) obstacle_side(best, obs[k], static_cast<int>(k), x, xn, h);

      if (best.tau < kInf) {
        double s = t - best.tau * h;
        if (!(s < pole.t)) s = std::nextafter(pole.t, -kInf);
        return {SpaceTimePoint(best.point, s), best.tag, step};
      }
      for (std::size_t k = 0; k < obs.size(); ++k) {
        const Box& o = obs[k];
        if (o.t_hi == t_next && (xn.array() >= o.lo.array()).all() && (xn.array() <= o.hi.array()).all())
          return {SpaceTimePoint(xn, t_next), {ExitKind::ObstacleTop, static_cast<int>(k), -1}, step};
      }
      if (t_next == d_.t_lo()) return {SpaceTimePoint(xn, t_next), {ExitKind::ContainerBottom, -1, -1}, step};
      x.swap(xn);
      t = t_next;
    }
    throw std::runtime_error("simulate_exit: max_steps exceeded");
  }

 private:
  const SpaceTimeDomain& d_;
  const WalkConfig& cfg_;
  std::mt19937_64& rng_;
  int n_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

void validate(const WalkConfig& cfg) {
  if (cfg.dt < 0.0 || !std::isfinite(cfg.dt)) throw std::invalid_argument("walk: dt must be positive");
  if (!(cfg.bisection_tol > 0.0)) throw std::invalid_argument("walk: bisection_tol must be positive");
  if (cfg.max_steps < 1) throw std::invalid_argument("walk: max_steps must be >= 1");
  if (!(cfg.diffusivity > 0.0)) throw std::invalid_argument("walk: diffusivity must be positive");
}

}  // namespace

namespace targets {
Target everything() {
  return [](const ExitSample&) { return true; };
}
Target nothing() {
  return [](const ExitSample&) { return false; };
}
Target bottom() {
  return [](const ExitSample& s) { return s.tag.kind == ExitKind::ContainerBottom; };
}
Target container_side() {
  return [](const ExitSample& s) { return s.tag.kind == ExitKind::ContainerSide; };
}
Target obstacle(int i) {
  return [i](const ExitSample& s) {
    return (s.tag.kind == ExitKind::ObstacleTop || s.tag.kind == ExitKind::ObstacleSide) && s.tag.obstacle == i;
  };
}
Target any_obstacle() {
  return [](const ExitSample& s) {
    return s.tag.kind == ExitKind::ObstacleTop || s.tag.kind == ExitKind::ObstacleSide;
  };
}
Target complement(Target t) {
  return [t = std::move(t)](const ExitSample& s) { return !t(s); };
}
Target at_point(PointTarget p) {
  return [p = std::move(p)](const ExitSample& s) { return p(s.exit); };
}
PointTarget in_box(const Box& b) {
  return [b](const SpaceTimePoint& p) { return b.contains(p); };
}
}  // namespace targets

ExitSample simulate_exit(const SpaceTimeDomain& domain, const SpaceTimePoint& pole, const WalkConfig& cfg,
                         std::uint64_t walk_index) {
  validate(cfg);
  if (!domain.contains(pole)) throw std::invalid_argument("simulate_exit: pole outside the domain");
  auto rng = walk_stream(cfg.seed, walk_index);
  Walker w(domain, cfg, rng);
  ExitSample s = w.run(pole);
  if (!(s.exit.t < pole.t)) throw std::logic_error("simulate_exit: exit not in the past of the pole");
  return s;
}

MCEstimate make_estimate(std::int64_t hits, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("estimate: N must be >= 1");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, seed, hits};
}

void set_thread_count(int k) { g_threads = std::max(0, k); }

int thread_count() {
  const int k = g_threads.load();
  if (k > 0) return k;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& f) {
  const std::int64_t k = std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(n, 1));
  if (k <= 1) {
    f(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(k);
  for (std::int64_t c = 0; c < k; ++c) {
    pool.emplace_back([&, c] {
      try {
        f(n * c / k, n * (c + 1) / k);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ExitSample> simulate_batch(const SpaceTimeDomain& domain, const SpaceTimePoint& pole, std::int64_t n,
                                       const WalkConfig& cfg) {
  if (n < 1) throw std::invalid_argument("simulate_batch: N must be >= 1");
  validate(cfg);
  if (!domain.contains(pole)) throw std::invalid_argument("simulate_batch: pole outside the domain");
  std::vector<ExitSample> out(static_cast<std::size_t>(n));
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) out[i] = simulate_exit(domain, pole, cfg, static_cast<std::uint64_t>(i));
  });
  return out;
}

MCEstimate estimate_caloric(const SpaceTimeDomain& domain, const SpaceTimePoint& pole, const Target& target,
                            std::int64_t n, const WalkConfig& cfg) {
  if (n < 1) throw std::invalid_argument("estimate_caloric: N must be >= 1");
  validate(cfg);
  if (!domain.contains(pole)) throw std::invalid_argument("estimate_caloric: pole outside the domain");
  std::atomic<std::int64_t> hits{0};
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    std::int64_t local = 0;
    for (std::int64_t i = b; i < e; ++i)
      if (target(simulate_exit(domain, pole, cfg, static_cast<std::uint64_t>(i)))) ++local;
    hits += local;
  });
  return make_estimate(hits.load(), n, cfg.seed);
}

MCEstimate estimate_from(const std::vector<ExitSample>& samples, const Target& target, std::uint64_t seed) {
  std::int64_t hits = 0;
  for (const auto& s : samples)
    if (target(s)) ++hits;
  return make_estimate(hits, static_cast<std::int64_t>(samples.size()), seed);
}

}  // namespace caloric

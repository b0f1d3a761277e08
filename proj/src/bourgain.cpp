#include "caloric/bourgain.hpp"

#include "caloric/domain.hpp"
#include "caloric/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace caloric {

namespace {

struct Atom {
  Vector y;
  double s;
  double w;
};

std::vector<Atom> atoms(const TreeMeasure& mu) {
  std::vector<Atom> out;
  out.reserve(mu.leaf_masses().size());
  for (const auto& [j, w] : mu.leaf_masses()) {
    if (w == 0.0) continue;
    const SpaceTimePoint c = ParabolicCube(mu.m(), mu.leaf_generation(), j).mid_point();
    out.push_back({c.x, c.t, w});
  }
  return out;
}

double eval(const std::vector<Atom>& a, const SpaceTimePoint& p) {
  double u = 0.0;
  for (const auto& at : a) {
    const double dt = p.t - at.s;
    if (dt <= 0.0) continue;
    u += at.w * W(p.x - at.y, dt);
  }
  return u;
}

std::vector<double> eval_all(const std::vector<Atom>& a, const std::vector<SpaceTimePoint>& pts) {
  std::vector<double> out(pts.size());
  parallel_for(static_cast<std::int64_t>(pts.size()), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) out[i] = eval(a, pts[i]);
  });
  return out;
}

// Midpoint grid over a box, or the closed grid with both endpoints;
// degenerate axes contribute their single value.
std::vector<SpaceTimePoint> box_grid(const Box& b, int g, bool closed = false) {
  const int n = static_cast<int>(b.lo.size());
  std::vector<std::vector<double>> axes(n + 1);
  auto axis = [g, closed](double lo, double hi) {
    std::vector<double> v;
    if (hi - lo <= 0.0) return std::vector<double>{lo};
    if (closed)
      for (int i = 0; i <= g; ++i) v.push_back(lo + (hi - lo) * i / g);
    else
      for (int i = 0; i < g; ++i) v.push_back(lo + (hi - lo) * (i + 0.5) / g);
    return v;
  };
  for (int i = 0; i < n; ++i) axes[i] = axis(b.lo[i], b.hi[i]);
  axes[n] = axis(b.t_lo, b.t_hi);
  std::vector<SpaceTimePoint> out;
  std::vector<std::size_t> idx(n + 1, 0);
  while (true) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
    out.push_back(SpaceTimePoint{x, axes[n][idx[n]]});
    int i = 0;
    while (i <= n && ++idx[i] == axes[i].size()) idx[i++] = 0;
    if (i > n) break;
  }
  return out;
}

GridSet localize(const GridSet& e, const ParabolicCube& target) {
  if (target.is_descendant_of(e.root())) return e.restrict_to(target);
  throw std::invalid_argument("bourgain audit: E must lie on a grid containing Q_*");
}

nlohmann::json check_json(const PotentialCheck& c) {
  return {{"value", c.value}, {"bound", c.bound}, {"pass", c.pass}, {"margin", c.margin},
          {"refined_margin", c.refined_margin}, {"stable", c.stable}};
}

}  // namespace

double potential(const TreeMeasure& mu, const SpaceTimePoint& p) { return eval(atoms(mu), p); }

std::vector<double> potential(const TreeMeasure& mu, const std::vector<SpaceTimePoint>& pts) {
  return eval_all(atoms(mu), pts);
}

std::vector<ParabolicCube> maximal_full_cubes(const GridSet& e) {
  const int depth = e.depth();
  const int m = e.m();
  const std::int64_t per = ipow(m, e.dim() + 2);
  std::vector<std::map<Index, std::int64_t>> count(depth + 1);
  for (const auto& j : e.leaves()) count[depth][j] = 1;
  std::vector<std::int64_t> full_at(depth + 1, 1);
  for (int d = depth - 1; d >= 0; --d) {
    full_at[d] = full_at[d + 1] * per;
    for (const auto& [j, c] : count[d + 1]) count[d][parent_index(j, m)] += c;
  }
  std::vector<ParabolicCube> out;
  for (int d = 0; d <= depth; ++d)
    for (const auto& [j, c] : count[d]) {
      if (c != full_at[d]) continue;
      if (d > 0) {
        const auto& up = count[d - 1].at(parent_index(j, m));
        if (up == full_at[d - 1]) continue;
      }
      out.emplace_back(m, e.root().k() + d, j);
    }
  return out;
}

double default_eta(int n, int m) {
  return std::pow(static_cast<double>(m), -(n + 2)) / (2 * alpha_ledger<double>(n).alpha);
}

nlohmann::json BourgainAudit::to_json() const {
  nlohmann::json est = nlohmann::json::array();
  for (std::size_t i = 0; i < poles.size(); ++i) {
    nlohmann::json x = nlohmann::json::array();
    for (int k = 0; k < poles[i].dim(); ++k) x.push_back(poles[i].x[k]);
    est.push_back({{"x", x}, {"t", poles[i].t}, {"mean", estimates[i].mean}, {"stderr", estimates[i].std_error},
                   {"n", estimates[i].n}});
  }
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& q : obstacles) obs.push_back(q.literal());
  return {{"n", n},
          {"m", m},
          {"rho", rho},
          {"eta", eta},
          {"eps_r", eps_r},
          {"alpha_ledger", caloric::to_json(ledger)},
          {"content", content},
          {"mu_total", mu_total},
          {"leaves", leaves},
          {"obstacles", obs},
          {"e1", check_json(e1)},
          {"e2", check_json(e2)},
          {"e3", check_json(e3)},
          {"gap_ratio", gap_ratio},
          {"gap_ratio_expected", gap_ratio_expected},
          {"ratio_pass", ratio_pass},
          {"poles", est},
          {"min_estimate", min_estimate},
          {"min_stderr", min_std_error},
          {"alt1", alt1},
          {"alt1_strict", alt1_strict},
          {"alt2_threshold", alt2_threshold},
          {"alt2", alt2},
          {"potential_pass", potential_pass()},
          {"stable", stable()},
          {"pass", pass()}};
}

BourgainAudit bourgain_alternative_audit(const GridSet& e, const CubeTriple& triple, const BourgainConfig& cfg) {
  triple.check_invariants(1e-9);
  if (!triple.target_child) throw std::invalid_argument("bourgain audit: triple needs a target cube");
  const ParabolicCube& qs = *triple.target_child;
  const int n = triple.dim();
  if (e.dim() != n || e.m() != qs.m()) throw std::invalid_argument("bourgain audit: E incompatible with the triple");

  BourgainAudit a;
  a.n = n;
  a.m = qs.m();
  a.rho = cfg.rho > 0.0 ? cfg.rho : n + 2.0;
  if (!(a.rho > n && a.rho <= n + 2)) throw std::invalid_argument("bourgain audit: rho must lie in (n, n+2]");
  a.eta = cfg.eta > 0.0 ? cfg.eta : default_eta(n, a.m);
  a.eps_r = triple.eps * triple.r;
  a.ledger = alpha_ledger<double>(n);
  const double md = a.m;
  const double grow = std::pow(md, a.rho) / (1 - std::pow(md, n - a.rho));
  a.alt2_threshold = a.ledger.alternative * grow * a.eta * std::pow(a.eps_r, a.rho);

  const GridSet local = localize(e, qs);
  a.leaves = local.size();
  a.gap_ratio = a.ledger.e2 / a.ledger.e3;
  a.gap_ratio_expected = std::exp(5.0 * n / 12.0);
  a.ratio_pass = std::abs(a.gap_ratio / a.gap_ratio_expected - 1) <= 1e-12;

  if (local.empty()) {
    a.e1.pass = a.e2.pass = a.e3.pass = true;
    a.alt2 = 0.0 <= a.alt2_threshold;
    return a;
  }

  a.content = net_content(local, a.rho).value;
  const TreeMeasure mu = build_frostman(local, a.rho);
  a.mu_total = mu.total();

  // Check points.
  const std::vector<SpaceTimePoint> f_pts = box_grid(triple.f_box(), cfg.check_grid, true);
  std::vector<SpaceTimePoint> b_pts;
  for (const auto& face : triple.normal_boundary()) {
    auto g = box_grid(face, cfg.check_grid, true);
    b_pts.insert(b_pts.end(), g.begin(), g.end());
  }
  std::vector<SpaceTimePoint> off;
  {
    std::mt19937_64 rng(cfg.walk.seed ^ 0xB0u);
    const Box qb = qs.box();
    const double h = a.eps_r;
    std::vector<std::uniform_real_distribution<double>> ax;
    for (int i = 0; i < n; ++i) ax.emplace_back(qb.lo[i] - h, qb.hi[i] + h);
    std::uniform_real_distribution<double> tt(qb.t_lo, qb.t_hi + 2 * h * h);
    while (static_cast<int>(off.size()) < cfg.random_points) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = ax[i](rng);
      SpaceTimePoint p{x, tt(rng)};
      if (!local.contains_point(p)) off.push_back(p);
    }
    // Just above each leaf top, where the potential peaks.
    const ParabolicCube probe(a.m, local.leaf_generation(), local.root().index());
    std::size_t taken = 0;
    for (const auto& j : local.leaves()) {
      if (taken++ >= 500) break;
      SpaceTimePoint p = ParabolicCube(a.m, local.leaf_generation(), j).top_center();
      p.t += 0.05 * probe.duration();
      if (!local.contains_point(p)) off.push_back(p);
    }
  }

  auto run = [&](const TreeMeasure& mm, bool first) {
    const auto at = atoms(mm);
    const double sc = std::pow(a.eps_r, -n) * mm.total();
    const auto uf = eval_all(at, f_pts);
    const auto ub = eval_all(at, b_pts);
    const auto uo = eval_all(at, off);
    const double fmin = *std::min_element(uf.begin(), uf.end());
    const double bmax = *std::max_element(ub.begin(), ub.end());
    const double omax = *std::max_element(uo.begin(), uo.end());
    const double e1b = a.ledger.e1 * grow * std::pow(a.eps_r, a.rho - n);
    const double e2b = a.ledger.e2 * sc;
    const double e3b = a.ledger.e3 * sc;
    const double m1 = e1b / omax;
    const double m2 = fmin / e2b;
    const double m3 = bmax > 0.0 ? e3b / bmax : std::numeric_limits<double>::infinity();
    if (first) {
      a.e1 = {omax, e1b, omax <= e1b, m1, m1, true};
      a.e2 = {fmin, e2b, fmin >= e2b, m2, m2, true};
      a.e3 = {bmax, e3b, bmax <= e3b, m3, m3, true};
    } else {
      auto upd = [](PotentialCheck& c, double r) {
        c.refined_margin = r;
        c.stable = std::isinf(r) && std::isinf(c.margin) ? true : std::abs(r / c.margin - 1) <= 0.05;
      };
      upd(a.e1, m1);
      upd(a.e2, m2);
      upd(a.e3, m3);
    }
  };
  run(mu, true);
  if (cfg.refine_check) run(build_frostman(local.refined(1), a.rho), false);

  // Caloric measure of E from poles in F.
  a.obstacles = maximal_full_cubes(local);
  const Box qb = triple.q_box();
  double t_min = std::numeric_limits<double>::infinity();
  std::vector<ParabolicRectangle> hs;
  for (const auto& c : a.obstacles) {
    hs.push_back(ParabolicRectangle::from_box(c.box()));
    t_min = std::min(t_min, c.t_lo());
  }
  const SpaceTimeDomain omega = SpaceTimeDomain::box_cylinder(qb.lo, qb.hi, t_min, qb.t_hi).with_obstacles(hs);
  a.poles = box_grid(triple.f_box(), cfg.pole_grid);
  a.min_estimate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.poles.size(); ++i) {
    WalkConfig wc = cfg.walk;
    wc.seed = cfg.walk.seed + 0x9E3779B97F4A7C15ull * (i + 1);
    const MCEstimate est = estimate_caloric(omega, a.poles[i], targets::any_obstacle(), cfg.walks, wc);
    a.estimates.push_back(est);
    if (est.mean < a.min_estimate) {
      a.min_estimate = est.mean;
      a.min_std_error = est.std_error;
    }
  }
  a.alt1 = true;
  a.alt1_strict = true;
  for (const auto& est : a.estimates) {
    if (est.mean + 3 * est.std_error < a.eta) a.alt1 = false;
    if (est.mean - 3 * est.std_error < a.eta) a.alt1_strict = false;
  }
  a.alt2 = a.content <= a.alt2_threshold;
  return a;
}

}  // namespace caloric

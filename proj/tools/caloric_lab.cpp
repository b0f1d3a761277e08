// Experiment runner. Exit codes: 0 all audits pass, 1 audit failure, 2 bad input.

#include "caloric/audits.hpp"
#include "caloric/bourgain.hpp"
#include "caloric/constants.hpp"
#include "caloric/content.hpp"
#include "caloric/dimension_tree.hpp"
#include "caloric/frostman.hpp"
#include "caloric/heat_kernel.hpp"
#include "caloric/walk.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef CALORIC_VERSION
#define CALORIC_VERSION "unknown"
#endif

using namespace caloric;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr double kSigmas = 3.0;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- schema helpers ----

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw InputError(where + ": unknown key '" + k + "'");
}

double num(const json& j, const std::string& key, std::optional<double> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw InputError("missing number '" + key + "'");
  }
  if (!j[key].is_number()) throw InputError("'" + key + "' must be a number");
  return j[key].get<double>();
}

std::int64_t integer(const json& j, const std::string& key, std::optional<std::int64_t> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw InputError("missing integer '" + key + "'");
  }
  if (!j[key].is_number_integer()) throw InputError("'" + key + "' must be an integer");
  return j[key].get<std::int64_t>();
}

// Infinite time bounds are written as null.
double time_bound(const json& j, const std::string& key, double inf) {
  if (!j.contains(key)) throw InputError("missing time bound '" + key + "'");
  if (j[key].is_null()) return inf;
  return num(j, key);
}

Vector vec(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].empty()) throw InputError("'" + key + "' must be a non-empty array");
  Vector v(static_cast<int>(j[key].size()));
  for (std::size_t i = 0; i < j[key].size(); ++i) {
    if (!j[key][i].is_number()) throw InputError("'" + key + "' must hold numbers");
    v[static_cast<int>(i)] = j[key][i].get<double>();
  }
  return v;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- run context ----

struct Context {
  std::string sub;
  fs::path out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  json config = json::object();

  std::uint64_t need_seed() const {
    if (!seed) throw InputError(sub + ": a seed is required (--seed or \"seed\" in the config)");
    return *seed;
  }
  fs::path path(const std::string& name) const { return out / name; }
};

struct Outcome {
  bool pass = true;
  json result = json::object();
  // Every n whose alpha ledger the run depends on.
  std::set<int> dims;
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

GridSet gridset_from(const json& spec) {
  if (spec.is_object() && spec.contains("file")) {
    allow_keys(spec, "gridset", {"file"});
    std::ifstream f(spec["file"].get<std::string>());
    if (!f) throw InputError("cannot open gridset file " + spec["file"].get<std::string>());
    return read_gridset(f);
  }
  if (!spec.is_object()) throw InputError("gridset: expected an object");
  return generate_gridset(spec);
}

// ---- subcommands ----

Outcome kernel_portrait(const Context& ctx) {
  const json& c = ctx.config;
  allow_keys(c, "kernel-portrait", {"n_max", "r", "t_points", "seed"});
  const int n_max = static_cast<int>(integer(c, "n_max", 8));
  if (n_max < 1 || n_max > 64) throw InputError("n_max must be in [1, 64]");
  std::vector<double> rs{0.1, 1.0, 10.0};
  if (c.contains("r")) rs = c["r"].get<std::vector<double>>();
  for (double r : rs)
    if (!(r > 0)) throw InputError("r values must be positive");
  const int tp = static_cast<int>(integer(c, "t_points", 200));
  if (tp < 2) throw InputError("t_points must be >= 2");

  using Big = boost::multiprecision::cpp_bin_float_50;
  Outcome o;
  std::ostringstream table, trace;
  table << "n,C_n,argmax_rel_err_max,four_pi_bound\n";
  trace << "n,r,t,phi\n";
  json rows = json::array();
  double worst = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    double err = 0.0;
    for (double r : rs) {
      const double t = static_cast<double>(numeric_phi_argmax_t<Big>(Big(r), n, Big(1e-15)));
      err = std::max(err, std::abs(t / phi_argmax_t(r, n) - 1));
      const double peak = phi_argmax_t(r, n);
      for (int i = 1; i <= tp; ++i) {
        const double tt = peak * 6.0 * i / tp;
        trace << n << "," << g17(r) << "," << g17(tt) << "," << g17(phi(r, tt, n)) << "\n";
      }
    }
    worst = std::max(worst, err);
    const double cn = C_n<double>(n);
    const double fp = std::pow(4 * std::acos(-1.0), -n / 2.0);
    table << n << "," << g17(cn) << "," << g17(err) << "," << g17(fp) << "\n";
    rows.push_back({{"n", n}, {"C_n", cn}, {"argmax_rel_err", err}});
  }
  bool chain = true;
  if (n_max >= 8) {
    chain = 0.25 > C_n<double>(1) && C_n<double>(6) > 0.04 && C_n<double>(6) < C_n<double>(7) && C_n<double>(7) < C_n<double>(8);
    for (int n = 1; n < 6; ++n) chain = chain && C_n<double>(n) > C_n<double>(n + 1);
  }
  double norm = 0.0;
  for (int n = 1; n <= std::min(n_max, 3); ++n) norm = std::max(norm, std::abs(normalization_check(n, 1.0) - 1));
  write_text(ctx.path("cn_table.csv"), table.str());
  write_text(ctx.path("vertical_trace.csv"), trace.str());
  o.pass = worst <= 1e-9 && chain && norm <= 1e-6;
  o.result = {{"table", rows}, {"argmax_rel_err_max", worst}, {"cn_ordering", chain}, {"normalization_err", norm}};
  return o;
}

Outcome constants(const Context& ctx, int n) {
  if (n < 1 || n > 8) throw InputError("--n must be in [1, 8]");
  Outcome o;
  o.dims.insert(n);
  const auto r = lemma2_constants(n);
  o.result = to_json(r);
  o.result["rho_margin_at_least_1e-9"] = r.rho_margin >= Wide(1e-9);
  o.pass = r.beta > 0 && r.rho_margin > 0;
  std::ostringstream csv;
  csv << "n,log10_m,rho,lambda,beta,rho_margin\n";
  const Wide l10 = log(Wide(10));
  csv << n << "," << wide_str(r.log_m / l10, 17) << "," << wide_str(r.rho, 17) << "," << wide_str(r.lambda, 17) << ","
      << wide_str(r.beta, 17) << "," << wide_str(r.rho_margin, 17) << "\n";
  write_text(ctx.path("constants.csv"), csv.str());
  std::cout << o.result.dump(2) << "\n";
  return o;
}

Outcome dim_tree(const Context& ctx) {
  const json& c = ctx.config;
  allow_keys(c, "dim-tree", {"gridset", "measure", "frostman_rho", "rho", "lambda", "eps", "delta_j", "alphas", "seed"});
  if (!c.contains("gridset")) throw InputError("dim-tree: missing 'gridset'");
  const GridSet e = gridset_from(c["gridset"]);
  const std::string kind = c.value("measure", std::string("frostman"));
  TreeParams p;
  p.rho = num(c, "rho");
  p.lambda = num(c, "lambda");
  p.eps = num(c, "eps", 0.0);
  p.delta_j = static_cast<int>(integer(c, "delta_j"));
  std::vector<double> alphas{0.0, 0.1, 0.5};
  if (c.contains("alphas")) alphas = c["alphas"].get<std::vector<double>>();
  std::optional<MeasureOracle> mu;
  if (kind == "frostman") {
    if (e.empty()) throw InputError("dim-tree: empty gridset has no Frostman measure");
    mu = MeasureOracle::frostman(build_frostman(e, num(c, "frostman_rho", p.rho)));
  } else if (kind == "normalized-volume") {
    mu = MeasureOracle::normalized_volume(e.root());
  } else {
    throw InputError("dim-tree: measure must be 'frostman' or 'normalized-volume'");
  }
  TreeReport r;
  try {
    r = build_dimension_tree(e, *mu, p, alphas);
  } catch (const std::invalid_argument& ex) {
    throw InputError(ex.what());
  }
  Outcome o;
  o.pass = r.pass();
  o.result = r.to_json();
  o.result["measure"] = mu->tag();
  std::ostringstream csv;
  csv << "level,cube,type,terminal,type2_above\n";
  for (const auto& nd : r.nodes)
    csv << nd.level << "," << nd.cube.literal() << "," << to_string(nd.type) << "," << nd.terminal << "," << nd.type2_above
        << "\n";
  write_text(ctx.path("tree_nodes.csv"), csv.str());
  return o;
}

Outcome bourgain_alt(const Context& ctx) {
  const json& c = ctx.config;
  allow_keys(c, "bourgain-alt",
             {"m", "n", "E", "walks", "pole_grid", "check_grid", "random_points", "refine_check", "eta", "rho", "dt", "seed"});
  const int m = static_cast<int>(integer(c, "m", 7));
  const int n = static_cast<int>(integer(c, "n", 1));
  if (m < 3 || n < 1 || n > 3) throw InputError("bourgain-alt: need m >= 3 and 1 <= n <= 3");
  const auto tr = standard_triple(ParabolicCube::unit(m, n));
  const json spec = c.value("E", json("full"));
  GridSet e = GridSet::full(*tr.target_child, 1);
  if (spec == "empty") {
    e = GridSet(*tr.target_child, 1, {});
  } else if (spec != "full") {
    e = gridset_from(spec);
  }
  BourgainConfig cfg;
  cfg.walks = integer(c, "walks", cfg.walks);
  cfg.pole_grid = static_cast<int>(integer(c, "pole_grid", cfg.pole_grid));
  cfg.check_grid = static_cast<int>(integer(c, "check_grid", cfg.check_grid));
  cfg.random_points = static_cast<int>(integer(c, "random_points", cfg.random_points));
  cfg.refine_check = c.value("refine_check", cfg.refine_check);
  cfg.eta = num(c, "eta", 0.0);
  cfg.rho = num(c, "rho", 0.0);
  cfg.walk.dt = num(c, "dt", 0.0);
  cfg.walk.seed = ctx.need_seed();
  if (cfg.walks < 1 || cfg.pole_grid < 1 || cfg.check_grid < 1 || cfg.random_points < 0)
    throw InputError("bourgain-alt: counts must be positive");
  BourgainAudit a;
  try {
    a = bourgain_alternative_audit(e, tr, cfg);
  } catch (const std::invalid_argument& ex) {
    throw InputError(ex.what());
  }
  Outcome o;
  o.dims.insert(n);
  o.pass = a.pass();
  o.result = a.to_json();
  std::ostringstream csv;
  csv << "pole,";
  for (int i = 0; i < n; ++i) csv << "x" << i << ",";
  csv << "t,mean,stderr,N\n";
  for (std::size_t i = 0; i < a.poles.size(); ++i) {
    csv << i << ",";
    for (int k = 0; k < n; ++k) csv << g17(a.poles[i].x[k]) << ",";
    csv << g17(a.poles[i].t) << "," << g17(a.estimates[i].mean) << "," << g17(a.estimates[i].std_error) << ","
        << a.estimates[i].n << "\n";
  }
  write_text(ctx.path("poles.csv"), csv.str());
  return o;
}

SpaceTimeDomain domain_from(const json& d) {
  allow_keys(d, "domain", {"box", "ball", "t_lo", "t_hi", "obstacles"});
  const double inf = std::numeric_limits<double>::infinity();
  const double t_lo = time_bound(d, "t_lo", -inf);
  const double t_hi = time_bound(d, "t_hi", inf);
  std::optional<SpaceTimeDomain> dom;
  if (d.contains("box") == d.contains("ball")) throw InputError("domain: give exactly one of 'box' or 'ball'");
  if (d.contains("box")) {
    allow_keys(d["box"], "box", {"lo", "hi"});
    dom = SpaceTimeDomain::box_cylinder(vec(d["box"], "lo"), vec(d["box"], "hi"), t_lo, t_hi);
  } else {
    allow_keys(d["ball"], "ball", {"center", "radius"});
    dom = SpaceTimeDomain::ball_cylinder(vec(d["ball"], "center"), num(d["ball"], "radius"), t_lo, t_hi);
  }
  if (d.contains("obstacles")) {
    if (!d["obstacles"].is_array()) throw InputError("obstacles must be an array");
    for (const auto& ob : d["obstacles"]) {
      allow_keys(ob, "obstacle", {"corner", "t0", "sides", "time_side"});
      dom = dom->with_obstacle(ParabolicRectangle(vec(ob, "corner"), num(ob, "t0"), vec(ob, "sides"), num(ob, "time_side")));
    }
  }
  return *dom;
}

Target target_from(const json& t, const SpaceTimeDomain& dom) {
  if (t.is_string()) {
    const auto s = t.get<std::string>();
    if (s == "bottom") return targets::bottom();
    if (s == "side") return targets::container_side();
    if (s == "any_obstacle") return targets::any_obstacle();
    if (s == "everything") return targets::everything();
    if (s == "nothing") return targets::nothing();
    throw InputError("unknown target '" + s + "'");
  }
  allow_keys(t, "target", {"obstacle", "box", "complement"});
  if (t.size() != 1) throw InputError("target: give exactly one form");
  if (t.contains("obstacle")) {
    const auto i = integer(t, "obstacle");
    if (i < 0 || i >= static_cast<std::int64_t>(dom.obstacles().size())) throw InputError("target obstacle out of range");
    return targets::obstacle(static_cast<int>(i));
  }
  if (t.contains("complement")) return targets::complement(target_from(t["complement"], dom));
  const json& b = t["box"];
  allow_keys(b, "target box", {"lo", "hi", "t_lo", "t_hi"});
  return targets::at_point(targets::in_box(Box{vec(b, "lo"), vec(b, "hi"), num(b, "t_lo"), num(b, "t_hi")}));
}

const char* kind_name(ExitKind k) {
  switch (k) {
    case ExitKind::ContainerSide: return "container_side";
    case ExitKind::ContainerBottom: return "container_bottom";
    case ExitKind::ObstacleTop: return "obstacle_top";
    case ExitKind::ObstacleSide: return "obstacle_side";
  }
  return "?";
}

Outcome experiment(const Context& ctx) {
  const json& c = ctx.config;
  allow_keys(c, "experiment", {"domain", "pole", "target", "N", "dt", "diffusivity", "max_steps", "oracle", "samples", "seed"});
  if (!c.contains("domain") || !c.contains("pole") || !c.contains("target"))
    throw InputError("experiment: 'domain', 'pole' and 'target' are required");
  const SpaceTimeDomain dom = domain_from(c["domain"]);
  allow_keys(c["pole"], "pole", {"x", "t"});
  const SpaceTimePoint pole(vec(c["pole"], "x"), num(c["pole"], "t"));
  if (pole.dim() != dom.dim()) throw InputError("pole dimension does not match the domain");
  if (!dom.contains(pole)) throw InputError("pole outside the domain");
  const Target target = target_from(c["target"], dom);
  const std::int64_t n = integer(c, "N", 10000);
  if (n < 1) throw InputError("N must be >= 1");
  WalkConfig w;
  w.seed = ctx.need_seed();
  w.dt = num(c, "dt", 0.0);
  w.diffusivity = num(c, "diffusivity", 1.0);
  w.max_steps = integer(c, "max_steps", w.max_steps);
  if (w.dt < 0 || !(w.diffusivity > 0) || w.max_steps < 1) throw InputError("invalid walk parameters");
  const auto samples = simulate_batch(dom, pole, n, w);
  const MCEstimate est = estimate_from(samples, target, w.seed);
  Outcome o;
  o.result = {{"estimate", to_json(est)}, {"dt", w.dt > 0 ? w.dt : dom.default_dt()}, {"diffusivity", w.diffusivity}};
  std::int64_t future = 0;
  for (const auto& s : samples) future += s.exit.t >= pole.t;
  o.result["zero_future_violations"] = future;
  o.pass = future == 0;
  if (c.contains("oracle")) {
    const double v = num(c, "oracle");
    const bool ok = std::abs(est.mean - v) <= kSigmas * est.std_error;
    o.result["oracle"] = {{"value", v}, {"difference", est.mean - v}, {"pass", ok}};
    o.pass = o.pass && ok;
  }
  std::ostringstream csv;
  csv << "mean,stderr,N,hits,seed\n" << g17(est.mean) << "," << g17(est.std_error) << "," << est.n << "," << est.hits << ","
      << est.seed << "\n";
  write_text(ctx.path("estimate.csv"), csv.str());
  if (c.value("samples", false)) {
    std::ostringstream sc;
    for (int i = 0; i < dom.dim(); ++i) sc << "x" << i << ",";
    sc << "t,kind,obstacle,steps,hit\n";
    for (const auto& s : samples) {
      for (int i = 0; i < dom.dim(); ++i) sc << g17(s.exit.x[i]) << ",";
      sc << g17(s.exit.t) << "," << kind_name(s.tag.kind) << "," << s.tag.obstacle << "," << s.steps << "," << target(s) << "\n";
    }
    write_text(ctx.path("samples.csv"), sc.str());
  }
  return o;
}

// ---- suites ----

struct Member {
  std::string name;
  bool pass = false;
  json detail;
};

void add(std::vector<Member>& out, const std::string& name, bool pass, json detail) {
  out.push_back({name, pass, std::move(detail)});
}

void fast_members(std::vector<Member>& out) {
  {
    using Big = boost::multiprecision::cpp_bin_float_50;
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n)
      for (double r : {0.1, 1.0, 10.0})
        worst = std::max(worst, std::abs(static_cast<double>(numeric_phi_argmax_t<Big>(Big(r), n, Big(1e-15))) / phi_argmax_t(r, n) - 1));
    add(out, "kernel_argmax", worst <= 1e-9, {{"rel_err", worst}});
  }
  {
    int sets = 0, bad = 0;
    for (int it = 0; it < 100; ++it) {
      const int m = 2 + it % 2;
      const GridSet e = generate_gridset({{"kind", "percolation"}, {"root", ParabolicCube::unit(m, 1).literal()},
                                          {"K", 1 + it % 3}, {"p", 0.1 + 0.8 * (it % 10) / 10.0}, {"seed", it}});
      if (e.empty()) continue;
      ++sets;
      const double rho = 0.5 + 2.0 * (it % 7) / 7.0;
      bad += build_frostman(e, rho).total() != net_content(e, rho).value;
    }
    add(out, "frostman_equals_dp", bad == 0, {{"sets", sets}, {"mismatches", bad}});
  }
  for (int n = 1; n <= 3; ++n) {
    const auto r = lemma2_constants(n);
    add(out, "constants_n" + std::to_string(n), r.beta > 0 && r.rho_margin >= Wide(1e-9),
        {{"beta", wide_str(r.beta, 6)}, {"rho_margin", wide_str(r.rho_margin, 6)}});
  }
  {
    const auto reg = bourgain_error_regression();
    add(out, "error_regression", !reg.original_ever_below && reg.corrected_in_range, to_json(reg));
  }
  {
    const GridSet slab = generate_gridset({{"kind", "slab"}, {"root", "3:0:0,0"}, {"K", 4}, {"time_rows", {0}}});
    TreeParams p;
    p.delta_j = 4;
    const auto r = build_dimension_tree(slab, MeasureOracle::frostman(build_frostman(slab, 1.0)), p);
    add(out, "dim_tree_slab", r.pass(), {{"s", r.s}, {"eta", r.eta}});
    const auto full = GridSet::full(ParabolicCube::unit(3, 1), 3);
    TreeParams q;
    q.delta_j = 3;
    const auto nv = build_dimension_tree(full, MeasureOracle::normalized_volume(full.root()), q);
    add(out, "dim_tree_not_applicable", !nv.applicable, {{"offenders", nv.offenders.size()}});
  }
}

void full_members(std::vector<Member>& out, std::int64_t n, std::uint64_t seed) {
  const auto interval = SpaceTimeDomain::box_cylinder(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0), 0.0, 1.0);
  WalkConfig cfg;
  cfg.seed = seed;
  {
    WalkConfig half = cfg;
    half.diffusivity = 0.5;
    const double T = 1.0 - 1e-12;
    double exact = 0.0;
    for (int k = 0; k < 400; ++k) {
      const double a = 2 * k + 1;
      const double pi = std::acos(-1.0);
      exact += 4 / pi * (k % 2 ? -1.0 : 1.0) / a * std::exp(-0.5 * a * a * pi * pi * T / 4);
    }
    const auto e = estimate_caloric(interval, {Vector::Constant(1, 0.0), T}, targets::bottom(), n, half);
    add(out, "interval_survival", std::abs(e.mean - exact) <= kSigmas * e.std_error,
        {{"estimate", to_json(e)}, {"sigma", e.std_error}, {"series", exact}});
  }
  {
    const auto inner = SpaceTimeDomain::box_cylinder(Vector::Constant(1, -0.5), Vector::Constant(1, 0.5), 0.4, 1.0);
    const auto rec = strong_markov_residual(inner, interval, {Vector::Constant(1, 0.0), 0.95},
                                            targets::in_box(Box{Vector::Constant(1, -5.0), Vector::Constant(1, 5.0), -1.0, 1e-9}), n, cfg);
    add(out, "strong_markov", rec.pass, rec.to_json());
  }
  {
    const std::vector<ParabolicRectangle> h{ParabolicRectangle(Vector::Constant(1, -0.5), 0.1, Vector::Constant(1, 1.0), 0.6),
                                            ParabolicRectangle(Vector::Constant(1, -0.25), 0.15, Vector::Constant(1, 0.5), 0.4)};
    const auto rec = nested_rectangle_bound(interval.with_obstacle(h.back()), h, {Vector::Constant(1, 0.0), 0.95}, n, cfg);
    add(out, "nested_rectangles", rec.pass, rec.to_json());
  }
  for (const char* ratio_s : {"0.1", "0.3", "1"}) {
    const double ratio = std::stod(ratio_s);
    const SpaceTimePoint pole(Vector::Constant(1, 0.4), 0.8);
    const SpaceTimePoint center(Vector::Constant(1, 1.0), 0.5);
    const double r = ratio * interval.boundary_distance(pole);
    const auto ball = check_ball_estimate(interval, pole, center, r, n, cfg);
    const auto cyl = check_cylinder_estimate(interval, pole, center, r, r * r / 4, n, cfg);
    add(out, std::string("universal_estimates_r") + ratio_s, ball.pass && cyl.pass, {{"ball", ball.to_json()}, {"cylinder", cyl.to_json()}});
  }
  {
    WosConfig wos;
    wos.seed = seed + 1;
    const Footprint disk = SpatialBall{Vector::Zero(2), 1.0};
    const auto rec = cylinder_projection_check(disk, Vector::Zero(2), [](const Vector& y) { return y[0] > 0 && y[1] > 0; }, n, cfg, wos);
    add(out, "cylinder_projection_disk", rec.pass, rec.to_json());
  }
  {
    const auto tr = standard_triple(ParabolicCube::unit(7, 1));
    BourgainConfig b;
    b.walks = n;
    b.walk.seed = seed;
    const auto a = bourgain_alternative_audit(GridSet::full(*tr.target_child, 1), tr, b);
    json j = a.to_json();
    j.erase("poles");
    add(out, "bourgain_full", a.alt1_strict && a.potential_pass(), j);
  }
}

Outcome suite(const Context& ctx, const std::string& name) {
  if (name != "fast" && name != "full") throw InputError("unknown suite '" + name + "' (fast|full)");
  allow_keys(ctx.config, "suite", {"N", "seed"});
  std::vector<Member> members;
  fast_members(members);
  if (name == "full") {
    const std::int64_t n = integer(ctx.config, "N", 100000);
    if (n < 1) throw InputError("N must be >= 1");
    full_members(members, n, ctx.need_seed());
  }
  Outcome o;
  o.dims = {1, 2, 3};
  json arr = json::array();
  std::ostringstream csv;
  csv << "member,pass\n";
  for (const auto& m : members) {
    arr.push_back({{"name", m.name}, {"pass", m.pass}, {"detail", m.detail}});
    csv << m.name << "," << m.pass << "\n";
    std::cout << (m.pass ? "PASS " : "FAIL ") << m.name << "\n";
    o.pass = o.pass && m.pass;
  }
  o.result = {{"suite", name}, {"members", arr}};
  write_text(ctx.path("suite.csv"), csv.str());
  return o;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic content, caloric measure and dimension audits"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed_flag = 0;
  std::string out_dir = ".";
  int threads = 0;
  app.add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed_flag, "Seed for stochastic runs");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);

  int const_n = 1;
  std::string suite_name;
  auto* kp = app.add_subcommand("kernel-portrait", "C_n table and vertical-trace profiles");
  auto* cs = app.add_subcommand("constants", "Explicit constants for the grid and rho search");
  cs->add_option("--n", const_n, "Space dimension")->required();
  auto* dt = app.add_subcommand("dim-tree", "Dimension-bound tree on a grid set");
  auto* ba = app.add_subcommand("bourgain-alt", "Bourgain alternative audit");
  auto* ex = app.add_subcommand("experiment", "Caloric Monte Carlo from a JSON config");
  auto* su = app.add_subcommand("suite", "Audit suite");
  su->add_option("name", suite_name, "fast | full")->required();
  // Subcommand flags may follow the subcommand too.
  for (auto* s : {kp, cs, dt, ba, ex, su}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitInput;
  }

  Context ctx;
  ctx.out = out_dir;
  ctx.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw InputError("cannot open config " + config_path);
      try {
        ctx.config = json::parse(f);
      } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed config: ") + e.what());
      }
      if (!ctx.config.is_object()) throw InputError("config must be a JSON object");
      if (ctx.config.contains("seed")) {
        if (!ctx.config["seed"].is_number_unsigned()) throw InputError("'seed' must be a non-negative integer");
        ctx.seed = ctx.config["seed"].get<std::uint64_t>();
      }
    }
    if (*seed_opt) ctx.seed = seed_flag;
    set_thread_count(threads);
    fs::create_directories(ctx.out);
    for (auto* s : app.get_subcommands()) ctx.sub = s->get_name();

    if (ctx.sub == "kernel-portrait") o = kernel_portrait(ctx);
    else if (ctx.sub == "constants") o = constants(ctx, const_n);
    else if (ctx.sub == "dim-tree") o = dim_tree(ctx);
    else if (ctx.sub == "bourgain-alt") o = bourgain_alt(ctx);
    else if (ctx.sub == "experiment") o = experiment(ctx);
    else o = suite(ctx, suite_name);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid config: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }

  json constants_used = json::object();
  for (int n : o.dims) constants_used["alpha_ledger_n" + std::to_string(n)] = to_json(alpha_ledger<double>(n));
  const json audit = {{"version", CALORIC_VERSION},
                      {"subcommand", ctx.sub},
                      {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)},
                      {"config", ctx.config},
                      {"constants", constants_used},
                      {"result", o.result},
                      {"pass", o.pass}};
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_json(ctx.path("audit.json"), audit);
    write_json(ctx.path("metadata.json"),
               {{"timestamp_utc", utc_now()}, {"wall_seconds", secs}, {"threads", thread_count()}, {"version", CALORIC_VERSION}});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  std::cerr << (o.pass ? "PASS " : "FAIL ") << ctx.sub << "\n";
  return o.pass ? kExitPass : kExitFail;
}

#include "caloric/dimension_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace caloric {

namespace {

constexpr double kSpreadTol = 1e-12;

std::string kind_tag(MeasureOracle::Kind k) {
  switch (k) {
    case MeasureOracle::Kind::Frostman: return "frostman";
    case MeasureOracle::Kind::Empirical: return "empirical-MC";
    case MeasureOracle::Kind::Analytic: return "analytic";
  }
  return "unknown";
}

nlohmann::json cube_list(const std::vector<ParabolicCube>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& q : v) out.push_back(q.literal());
  return out;
}

}  // namespace

MeasureOracle::MeasureOracle(Kind kind, Evaluator eval, double total)
    : kind_(kind), eval_(std::move(eval)), total_(total) {
  if (!eval_) throw std::invalid_argument("MeasureOracle: empty evaluator");
  if (!(total_ >= 0.0) || total_ > 1.0 + 1e-12) throw std::invalid_argument("MeasureOracle: total must be in [0, 1]");
}

MeasureOracle MeasureOracle::frostman(const TreeMeasure& mu) {
  auto shared = std::make_shared<const TreeMeasure>(mu);
  return MeasureOracle(Kind::Frostman, [shared](const ParabolicCube& q) { return shared->mass(q); },
                       std::min(mu.total(), 1.0));
}

MeasureOracle MeasureOracle::normalized_volume(const ParabolicCube& root) {
  return MeasureOracle(
      Kind::Analytic,
      [root](const ParabolicCube& q) {
        if (q.m() != root.m() || q.dim() != root.dim()) throw std::invalid_argument("incompatible cube");
        if (q.k() >= root.k())
          return q.is_descendant_of(root) ? std::pow(static_cast<double>(root.m()), -(root.dim() + 2) * (q.k() - root.k()))
                                          : 0.0;
        return root.is_descendant_of(q) ? 1.0 : 0.0;
      },
      1.0);
}

MeasureOracle MeasureOracle::empirical(const ParabolicCube& root, int depth, const std::vector<SpaceTimePoint>& points,
                                       std::int64_t n_total) {
  if (depth < 0) throw std::invalid_argument("empirical: depth must be >= 0");
  if (n_total <= 0 || static_cast<std::int64_t>(points.size()) > n_total)
    throw std::invalid_argument("empirical: n_total must be >= number of points and positive");
  const int m = root.m();
  const int n = root.dim();
  const int g = root.k() + depth;
  const ParabolicCube probe(m, g, Index(n + 1, 0));
  const double side = probe.side();
  const double dur = probe.duration();
  auto levels = std::make_shared<std::vector<std::map<Index, std::int64_t>>>(depth + 1);
  std::int64_t kept = 0;
  for (const auto& p : points) {
    if (p.dim() != n) throw std::invalid_argument("empirical: dimension mismatch");
    if (!root.contains(p, Convention::HalfOpen)) continue;
    Index j(n + 1);
    for (int i = 0; i < n; ++i) j[i] = static_cast<std::int64_t>(std::floor(p.x[i] / side));
    j[n] = static_cast<std::int64_t>(std::floor(p.t / dur));
    // Guard the floor against rounding at cube faces.
    const ParabolicCube leaf(m, g, j);
    if (!leaf.is_descendant_of(root)) continue;
    ++kept;
    Index a = j;
    for (int d = depth; d >= 0; --d) {
      ++(*levels)[d][a];
      if (d > 0) a = parent_index(a, m);
    }
  }
  const double nt = static_cast<double>(n_total);
  return MeasureOracle(
      Kind::Empirical,
      [root, depth, levels, nt, m, n, kept](const ParabolicCube& q) {
        if (q.m() != m || q.dim() != n) throw std::invalid_argument("incompatible cube");
        const int d = q.k() - root.k();
        if (d < 0) return root.is_descendant_of(q) ? static_cast<double>(kept) / nt : 0.0;
        if (d <= depth) {
          auto it = (*levels)[d].find(q.index());
          return it == (*levels)[d].end() ? 0.0 : static_cast<double>(it->second) / nt;
        }
        const ParabolicCube leaf = q.ancestor(d - depth);
        auto it = (*levels)[depth].find(leaf.index());
        if (it == (*levels)[depth].end()) return 0.0;
        return static_cast<double>(it->second) / nt * std::pow(static_cast<double>(m), -(n + 2) * (d - depth));
      },
      static_cast<double>(kept) / nt);
}

std::string MeasureOracle::tag() const { return kind_tag(kind_); }

double MeasureOracle::additivity_defect(const ParabolicCube& q) const {
  const double total = eval_(q);
  if (total == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& c : q.children()) s += eval_(c);
  return std::abs(total - s) / total;
}

MeasureOracle MeasureOracle::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
  auto inner = eval_;
  return MeasureOracle(kind_, [inner, c](const ParabolicCube& q) { return c * inner(q); }, std::min(1.0, c * total_));
}

std::string to_string(CubeType t) {
  switch (t) {
    case CubeType::Type1: return "type1";
    case CubeType::Type2: return "type2";
    case CubeType::Neither: return "neither";
  }
  return "unknown";
}

Classification classify_cube(const ParabolicCube& q, const GridSet& e, const MeasureOracle& mu, double rho,
                             double lambda) {
  const int n = e.dim();
  if (!(rho > 0.0) || rho >= n + 2) throw std::invalid_argument("classify_cube: rho must be in (0, n+2)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("classify_cube: lambda must be >= 0");
  if (q.k() < 0) throw std::invalid_argument("classify_cube: side must be <= 1");
  if (q.k() + 1 > e.leaf_generation()) throw std::invalid_argument("classify_cube: cube below grid resolution");

  Classification c;
  const double expo = n + 2 - rho;
  c.content_threshold = std::pow(q.side(), expo);
  if (!e.meets(q)) {
    c.type = CubeType::Type1;
    return c;
  }
  const GridSet local = e.restrict_to(q);
  const NetContentValue v = net_content(local, expo, Scale::power(q.k() + 1));
  c.content = v.value;
  c.witness = v.witness;

  const double vq = q.vol();
  for (const auto& r : q.children()) c.spread += std::sqrt(mu(r) * r.vol());
  c.spread_threshold = std::pow(static_cast<double>(q.m()), -lambda) * std::sqrt(mu(q) * vq);

  if (c.content < c.content_threshold)
    c.type = CubeType::Type1;
  else if (c.spread <= c.spread_threshold * (1 + kSpreadTol))
    c.type = CubeType::Type2;
  else
    c.type = CubeType::Neither;
  return c;
}

bool TreeReport::pass() const {
  if (!applicable || !covers || !disjoint || !mu_pass) return false;
  return std::all_of(m_goal.begin(), m_goal.end(), [](const MGoalCheck& g) { return g.pass; });
}

nlohmann::json TreeReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& ids : levels) {
    nlohmann::json row = nlohmann::json::array();
    for (int id : ids) {
      const auto& nd = nodes[id];
      row.push_back({{"cube", nd.cube.literal()},
                     {"type", nd.terminal ? "terminal" : to_string(nd.type)},
                     {"type2_above", nd.type2_above}});
    }
    lv.push_back(row);
  }
  nlohmann::json goals = nlohmann::json::array();
  for (const auto& g : m_goal)
    goals.push_back({{"alpha", g.alpha}, {"exponent", g.exponent}, {"content", g.content}, {"bound", g.bound}, {"pass", g.pass}});
  return {{"applicable", applicable},
          {"offenders", cube_list(offenders)},
          {"rho", params.rho},
          {"lambda", params.lambda},
          {"eps", params.eps},
          {"delta_j", params.delta_j},
          {"s", s},
          {"eta", eta},
          {"levels", lv},
          {"terminals", cube_list(terminals)},
          {"efficient", cube_list(efficient)},
          {"f_cubes", cube_list(f_cubes)},
          {"g_cubes", cube_list(g_cubes)},
          {"f_delta_size", f_delta.size()},
          {"covers", covers},
          {"disjoint", disjoint},
          {"content_j", content_j},
          {"m_goal", goals},
          {"mu_outside", mu_outside},
          {"mu_outside_from_f", mu_outside_from_f},
          {"mu_outside_bound", mu_outside_bound},
          {"mu_pass", mu_pass},
          {"pass", pass()}};
}

TreeReport build_dimension_tree(const GridSet& e, const MeasureOracle& mu, const TreeParams& params,
                                const std::vector<double>& alphas) {
  const int n = e.dim();
  const int m = e.m();
  if (e.root().k() != 0) throw std::invalid_argument("build_dimension_tree: root side must be 1");
  if (!(params.rho > 0.0) || params.rho >= n + 2) throw std::invalid_argument("build_dimension_tree: rho must be in (0, n+2)");
  if (!(params.lambda > 0.0)) throw std::invalid_argument("build_dimension_tree: lambda must be positive");
  TreeReport rep;
  rep.params = params;
  if (rep.params.eps == 0.0) rep.params.eps = params.rho / (params.lambda + params.rho);
  const double eps = rep.params.eps;
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("build_dimension_tree: eps must be in (0, 1)");
  const int J = params.delta_j;
  if (J < 1 || J > e.leaf_generation()) throw std::invalid_argument("build_dimension_tree: delta outside grid range");
  const double eps_j = eps * J;
  if (eps_j < 1.0 - 1e-12) throw std::invalid_argument("build_dimension_tree: eps log_m(1/delta) < 1");
  rep.s = static_cast<int>(std::ceil(eps_j - 1e-12));
  rep.eta = std::max(n + 2 - params.rho * (1 - eps), n + 2 - params.lambda * eps);

  // Breadth-first replay of the construction.
  std::deque<int> queue;
  rep.nodes.push_back(TreeNode{e.root(), -1, 0, false, CubeType::Neither, 0});
  queue.push_back(0);
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    if (static_cast<int>(rep.levels.size()) <= rep.nodes[id].level) rep.levels.emplace_back();
    rep.levels[rep.nodes[id].level].push_back(id);
    if (rep.nodes[id].cube.k() >= J) {
      rep.nodes[id].terminal = true;
      continue;
    }
    const ParabolicCube q = rep.nodes[id].cube;
    const Classification c = classify_cube(q, e, mu, params.rho, params.lambda);
    rep.nodes[id].type = c.type;
    std::vector<ParabolicCube> kids;
    if (c.type == CubeType::Type1) {
      kids = c.witness;
    } else {
      if (c.type == CubeType::Neither) rep.offenders.push_back(q);
      for (const auto& r : q.children())
        if (e.meets(r)) kids.push_back(r);
    }
    const int above = rep.nodes[id].type2_above + (c.type == CubeType::Type2 ? 1 : 0);
    for (const auto& r : kids) {
      rep.nodes.push_back(TreeNode{r, id, rep.nodes[id].level + 1, false, CubeType::Neither, above});
      queue.push_back(static_cast<int>(rep.nodes.size()) - 1);
    }
  }
  rep.applicable = rep.offenders.empty();
  if (!rep.applicable) return rep;

  std::set<ParabolicCube> f_set;
  for (int id = 0; id < static_cast<int>(rep.nodes.size()); ++id) {
    const auto& nd = rep.nodes[id];
    if (!nd.terminal) continue;
    rep.terminals.push_back(nd.cube);
    if (nd.type2_above < rep.s) {
      rep.efficient.push_back(nd.cube);
      continue;
    }
    // s-th type 2 ancestor counted from the root.
    int a = nd.parent;
    while (!(rep.nodes[a].type == CubeType::Type2 && rep.nodes[a].type2_above == rep.s - 1)) a = rep.nodes[a].parent;
    f_set.insert(rep.nodes[a].cube);
  }
  rep.f_cubes.assign(f_set.begin(), f_set.end());
  const double g_expo = n + 2 - params.lambda * eps;
  for (const auto& q : rep.f_cubes)
    if (std::pow(q.side(), g_expo) <= mu(q)) rep.g_cubes.push_back(q);
    else rep.mu_outside_from_f += mu(q);

  // Membership of E leaves in the collections.
  std::map<int, std::set<Index>> eg_by_gen, ef_by_gen;
  for (const auto& q : rep.efficient) {
    eg_by_gen[q.k()].insert(q.index());
    ef_by_gen[q.k()].insert(q.index());
  }
  for (const auto& q : rep.g_cubes) eg_by_gen[q.k()].insert(q.index());
  for (const auto& q : rep.f_cubes) ef_by_gen[q.k()].insert(q.index());
  auto inside = [&](const ParabolicCube& leaf, const std::map<int, std::set<Index>>& by_gen) {
    int hits = 0;
    for (const auto& [g, idx] : by_gen) {
      if (g > leaf.k()) continue;
      if (idx.count(leaf.ancestor(leaf.k() - g).index())) ++hits;
    }
    return hits;
  };
  rep.covers = true;
  rep.disjoint = true;
  std::set<Index> fd;
  for (const auto& j : e.leaves()) {
    const ParabolicCube leaf(m, e.leaf_generation(), j);
    const int cover = inside(leaf, ef_by_gen);
    if (cover == 0) rep.covers = false;
    if (cover > 1) rep.disjoint = false;
    if (inside(leaf, eg_by_gen) > 0) {
      fd.insert(j);
      rep.f_delta.push_back(leaf);
    } else {
      rep.mu_outside += mu(leaf);
    }
  }
  // Collection members never sit below the leaf generation.
  const GridSet f_delta(e.root(), e.depth(), fd);
  rep.content_j = std::max(0, static_cast<int>(std::ceil(eps_j - 1.0 - 1e-12)));
  const double dpow = std::pow(static_cast<double>(m), -J);
  for (double a : alphas) {
    MGoalCheck g;
    g.alpha = a;
    g.exponent = rep.eta + a;
    g.content = f_delta.empty() ? 0.0 : net_content(f_delta, g.exponent, Scale::power(rep.content_j)).value;
    g.bound = 2 * std::pow(static_cast<double>(m), a) * std::pow(dpow, eps * a);
    g.pass = g.content <= g.bound;
    rep.m_goal.push_back(g);
  }
  rep.mu_outside_bound = std::pow(static_cast<double>(m), params.lambda) * std::pow(dpow, params.lambda * eps / 2);
  rep.mu_pass = rep.mu_outside <= rep.mu_outside_bound;
  return rep;
}

}  // namespace caloric

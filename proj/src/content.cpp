#include "caloric/content.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace caloric {

namespace {

Index ancestor_index(Index j, int m, int levels) {
  for (int i = 0; i < levels; ++i) j = parent_index(j, m);
  return j;
}

// Offset of a generation-(k0+K) index relative to the first descendant of root.
Index relative_offset(const Index& leaf, const Index& root, int m, int depth) {
  Index off(leaf.size());
  const std::size_t n = leaf.size() - 1;
  const std::int64_t s = ipow(m, depth);
  for (std::size_t i = 0; i < n; ++i) off[i] = leaf[i] - root[i] * s;
  off[n] = leaf[n] - root[n] * s * s;
  return off;
}

Index from_offset(const Index& off, const Index& root, int m, int depth) {
  Index leaf(off.size());
  const std::size_t n = off.size() - 1;
  const std::int64_t s = ipow(m, depth);
  for (std::size_t i = 0; i < n; ++i) leaf[i] = root[i] * s + off[i];
  leaf[n] = root[n] * s * s + off[n];
  return leaf;
}

// Calls f(offset) for every generation-depth descendant offset, time last.
template <typename F>
void for_each_offset(int n, int m, int depth, F&& f) {
  const std::int64_t s = ipow(m, depth);
  Index off(n + 1, 0);
  while (true) {
    f(off);
    int i = n;
    while (i >= 0) {
      const std::int64_t lim = (i == n) ? s * s : s;
      if (++off[i] < lim) break;
      off[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

void check_compatible(const GridSet& e, const ParabolicCube& q) {
  if (q.m() != e.m() || q.dim() != e.dim()) throw std::invalid_argument("cube incompatible with GridSet");
}

}  // namespace

GridSet::GridSet(ParabolicCube root, int depth, std::set<Index> occupied)
    : root_(std::move(root)), depth_(depth) {
  if (depth_ < 0) throw std::invalid_argument("GridSet depth must be >= 0");
  const std::size_t n1 = root_.index().size();
  for (const auto& j : occupied) {
    if (j.size() != n1) throw std::invalid_argument("GridSet index has wrong length");
    if (ancestor_index(j, root_.m(), depth_) != root_.index())
      throw std::invalid_argument("occupied cube is not a descendant of the root");
  }
  levels_.resize(depth_ + 1);
  levels_[depth_] = std::move(occupied);
  for (int d = depth_ - 1; d >= 0; --d)
    for (const auto& j : levels_[d + 1]) levels_[d].insert(parent_index(j, root_.m()));
}

GridSet GridSet::full(const ParabolicCube& root, int depth) {
  std::set<Index> occ;
  for_each_offset(root.dim(), root.m(), depth,
                  [&](const Index& off) { occ.insert(from_offset(off, root.index(), root.m(), depth)); });
  return GridSet(root, depth, std::move(occ));
}

bool GridSet::meets(const ParabolicCube& q) const {
  check_compatible(*this, q);
  const int g = q.k() - root_.k();
  if (g < 0) return !empty() && root_.ancestor(-g) == q;
  if (g <= depth_) return levels_[g].count(q.index()) > 0;
  return levels_[depth_].count(ancestor_index(q.index(), m(), g - depth_)) > 0;
}

bool GridSet::contains_point(const SpaceTimePoint& p) const {
  if (p.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  const int g = leaf_generation();
  const int n = dim();
  std::vector<std::vector<std::int64_t>> cand(n + 1);
  auto fill = [](std::vector<std::int64_t>& c, double scaled) {
    const double f = std::floor(scaled);
    c.push_back(static_cast<std::int64_t>(f));
    if (f == scaled) c.push_back(static_cast<std::int64_t>(f) - 1);
  };
  const double s = std::pow(static_cast<double>(m()), g);
  for (int i = 0; i < n; ++i) fill(cand[i], p.x[i] * s);
  fill(cand[n], p.t * s * s);
  Index j(n + 1);
  std::vector<std::size_t> pick(n + 1, 0);
  while (true) {
    for (int i = 0; i <= n; ++i) j[i] = cand[i][pick[i]];
    if (levels_[depth_].count(j)) return true;
    int i = n;
    while (i >= 0 && ++pick[i] == cand[i].size()) pick[i--] = 0;
    if (i < 0) return false;
  }
}

GridSet GridSet::restrict_to(const ParabolicCube& q) const {
  check_compatible(*this, q);
  if (!q.is_descendant_of(root_)) throw std::invalid_argument("restriction cube outside the root");
  const int g = q.k() - root_.k();
  if (g > depth_) throw std::invalid_argument("restriction cube below resolution");
  std::set<Index> occ;
  for (const auto& j : levels_[depth_])
    if (ancestor_index(j, m(), depth_ - g) == q.index()) occ.insert(j);
  return GridSet(q, depth_ - g, std::move(occ));
}

GridSet GridSet::refined(int extra) const {
  if (extra < 0) throw std::invalid_argument("refinement must be >= 0");
  std::set<Index> occ;
  for (const auto& j : levels_[depth_]) {
    const ParabolicCube leaf(m(), leaf_generation(), j);
    for_each_offset(dim(), m(), extra,
                    [&](const Index& off) { occ.insert(from_offset(off, leaf.index(), m(), extra)); });
  }
  return GridSet(root_, depth_ + extra, std::move(occ));
}

GridSet GridSet::with_root(const ParabolicCube& new_root) const {
  if (new_root.m() != m() || new_root.dim() != dim()) throw std::invalid_argument("incompatible root");
  std::set<Index> occ;
  for (const auto& j : levels_[depth_])
    occ.insert(from_offset(relative_offset(j, root_.index(), m(), depth_), new_root.index(), m(), depth_));
  return GridSet(new_root, depth_, std::move(occ));
}

std::vector<Box> GridSet::leaf_boxes() const {
  std::vector<Box> out;
  out.reserve(size());
  for (const auto& j : levels_[depth_]) out.push_back(ParabolicCube(m(), leaf_generation(), j).box());
  return out;
}

GridSet unite(const GridSet& a, const GridSet& b) {
  if (!(a.root() == b.root()) || a.depth() != b.depth())
    throw std::invalid_argument("union needs a common root and depth");
  std::set<Index> occ = a.leaves();
  occ.insert(b.leaves().begin(), b.leaves().end());
  return GridSet(a.root(), a.depth(), std::move(occ));
}

double Scale::value(int m) const {
  if (infinite) return std::numeric_limits<double>::infinity();
  return std::pow(static_cast<double>(m), -j);
}

NetContentValue net_content(const GridSet& e, double rho, Scale delta) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("net_content: rho must be positive");
  const int m = e.m();
  const int k0 = e.root().k();
  const int depth = e.depth();
  if (!delta.infinite && delta.j > e.leaf_generation())
    throw std::invalid_argument("net_content: delta below grid resolution");

  struct Node {
    double value = 0.0;
    bool take = false;
    std::vector<Index> kids;
  };
  std::vector<std::map<Index, Node>> lv(depth + 1);
  const double leaf_cost = std::pow(ParabolicCube(m, k0 + depth, e.root().index()).side(), rho);
  for (const auto& j : e.level(depth)) lv[depth][j] = Node{leaf_cost, true, {}};

  for (int d = depth - 1; d >= 0; --d) {
    const int g = k0 + d;
    for (const auto& [j, child] : lv[d + 1]) {
      Node& p = lv[d][parent_index(j, m)];
      p.value += child.value;
      p.kids.push_back(j);
    }
    const double cap = std::pow(ParabolicCube(m, g, e.root().index()).side(), rho);
    const bool allowed = delta.infinite || g >= delta.j;
    for (auto& [j, node] : lv[d]) {
      if (allowed && cap <= node.value) {
        node.value = cap;
        node.take = true;
      }
    }
  }

  NetContentValue out;
  out.rho = rho;
  out.delta = delta;
  if (e.empty()) return out;
  out.value = lv[0].begin()->second.value;

  std::vector<std::pair<int, Index>> stack{{0, e.root().index()}};
  while (!stack.empty()) {
    auto [d, j] = stack.back();
    stack.pop_back();
    const Node& node = lv[d].at(j);
    if (node.take) {
      out.witness.emplace_back(m, k0 + d, j);
      continue;
    }
    for (auto it = node.kids.rbegin(); it != node.kids.rend(); ++it) stack.emplace_back(d + 1, *it);
  }
  return out;
}

ComparisonBounds comparison_bounds(int n, int m, double rho) {
  if (n < 1 || m < 2) throw std::invalid_argument("comparison_bounds: bad n or m");
  return {std::pow(std::sqrt(static_cast<double>(n)), rho), std::pow(3.0, n + 1) * std::pow(m, rho)};
}

void write_gridset(std::ostream& os, const GridSet& e) {
  os << "gridset " << e.dim() << ' ' << e.m() << ' ' << e.root().literal() << ' ' << e.depth() << '\n';
  for (const auto& j : e.leaves()) {
    for (std::size_t i = 0; i < j.size(); ++i) os << (i ? " " : "") << j[i];
    os << '\n';
  }
}

GridSet read_gridset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("gridset: missing header");
  std::istringstream hs(line);
  std::string tag, lit;
  int n = 0, m = 0, depth = -1;
  if (!(hs >> tag >> n >> m >> lit >> depth) || tag != "gridset")
    throw std::invalid_argument("gridset: malformed header");
  const ParabolicCube root = ParabolicCube::parse(lit);
  if (root.dim() != n || root.m() != m) throw std::invalid_argument("gridset: header disagrees with root");
  std::set<Index> occ;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Index j;
    long long v;
    while (ls >> v) j.push_back(v);
    if (!ls.eof() || j.size() != static_cast<std::size_t>(n + 1))
      throw std::invalid_argument("gridset: malformed index line: " + line);
    occ.insert(std::move(j));
  }
  return GridSet(root, depth, std::move(occ));
}

namespace {

bool digits_allowed(std::int64_t v, std::int64_t base, int levels, const std::vector<std::int64_t>& allowed) {
  for (int i = 0; i < levels; ++i) {
    if (std::find(allowed.begin(), allowed.end(), v % base) == allowed.end()) return false;
    v /= base;
  }
  return true;
}

}  // namespace

GridSet generate_gridset(const nlohmann::json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  const ParabolicCube root = ParabolicCube::parse(spec.at("root").get<std::string>());
  const int depth = spec.at("K").get<int>();
  const int n = root.dim();
  const int m = root.m();
  if (depth < 0) throw std::invalid_argument("gridset generator: K must be >= 0");
  const std::int64_t s = ipow(m, depth);
  std::set<Index> occ;
  auto add_if = [&](auto pred) {
    for_each_offset(n, m, depth, [&](const Index& off) {
      if (pred(off)) occ.insert(from_offset(off, root.index(), m, depth));
    });
  };

  if (kind == "full") {
    add_if([](const Index&) { return true; });
  } else if (kind == "slab") {
    // Time rows counted from the bottom of the root at leaf resolution.
    std::vector<std::int64_t> rows = spec.value("time_rows", std::vector<std::int64_t>{0});
    for (auto r : rows)
      if (r < 0 || r >= s * s) throw std::invalid_argument("gridset generator: slab row out of range");
    add_if([&](const Index& off) { return std::find(rows.begin(), rows.end(), off[n]) != rows.end(); });
  } else if (kind == "product") {
    const auto sd = spec.at("space_digits").get<std::vector<std::int64_t>>();
    const auto td = spec.at("time_digits").get<std::vector<std::int64_t>>();
    add_if([&](const Index& off) {
      for (int i = 0; i < n; ++i)
        if (!digits_allowed(off[i], m, depth, sd)) return false;
      return digits_allowed(off[n], std::int64_t(m) * m, depth, td);
    });
  } else if (kind == "percolation") {
    const double p = spec.at("p").get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gridset generator: p must lie in [0,1]");
    std::mt19937_64 rng(spec.at("seed").get<std::uint64_t>());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    add_if([&](const Index&) { return u(rng) < p; });
  } else if (kind == "cubes") {
    for (const auto& lit : spec.at("cubes")) {
      const ParabolicCube q = ParabolicCube::parse(lit.get<std::string>());
      if (q.m() != m || q.dim() != n || !q.is_descendant_of(root) || q.k() > root.k() + depth)
        throw std::invalid_argument("gridset generator: cube outside root or below resolution");
      const int extra = root.k() + depth - q.k();
      for_each_offset(n, m, extra, [&](const Index& off) { occ.insert(from_offset(off, q.index(), m, extra)); });
    }
  } else {
    throw std::invalid_argument("gridset generator: unknown kind '" + kind + "'");
  }
  return GridSet(root, depth, std::move(occ));
}

}  // namespace caloric

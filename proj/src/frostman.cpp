#include "caloric/frostman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace caloric {

namespace {

double side_of(int m, int g) { return ParabolicCube(m, g, Index(2, 0)).side(); }

double overlap_fraction(double a_lo, double a_hi, double b_lo, double b_hi) {
  const double w = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
  return w > 0.0 ? w / (b_hi - b_lo) : 0.0;
}

}  // namespace

TreeMeasure::TreeMeasure(ParabolicCube root, int depth, double rho, std::map<Index, double> leaf_mass,
                         std::optional<double> sweep_total)
    : root_(std::move(root)), depth_(depth), rho_(rho), sweep_total_(0.0) {
  if (depth_ < 0) throw std::invalid_argument("TreeMeasure: depth must be >= 0");
  if (!(rho_ > 0.0)) throw std::invalid_argument("TreeMeasure: rho must be positive");
  levels_.resize(depth_ + 1);
  const GridSet shape = [&] {
    std::set<Index> occ;
    for (const auto& [j, w] : leaf_mass) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("TreeMeasure: negative or non-finite mass");
      occ.insert(j);
    }
    return GridSet(root_, depth_, std::move(occ));
  }();
  (void)shape;
  levels_[depth_] = std::move(leaf_mass);
  for (int d = depth_ - 1; d >= 0; --d)
    for (const auto& [j, w] : levels_[d + 1]) levels_[d][parent_index(j, m())] += w;
  sweep_total_ = sweep_total.value_or(leaf_sum());
}

double TreeMeasure::leaf_sum() const {
  return levels_[0].empty() ? 0.0 : levels_[0].begin()->second;
}

double TreeMeasure::mass(const ParabolicCube& q) const {
  if (q.m() != m() || q.dim() != dim()) throw std::invalid_argument("TreeMeasure: incompatible cube");
  const int g = q.k() - root_.k();
  if (g < 0) return root_.ancestor(-g) == q ? leaf_sum() : 0.0;
  if (g <= depth_) {
    auto it = levels_[g].find(q.index());
    return it == levels_[g].end() ? 0.0 : it->second;
  }
  const ParabolicCube leaf = q.ancestor(g - depth_);
  auto it = levels_[depth_].find(leaf.index());
  if (it == levels_[depth_].end()) return 0.0;
  return it->second * std::pow(static_cast<double>(m()), -(dim() + 2) * (g - depth_));
}

double TreeMeasure::measure(const Box& a) const {
  double total = 0.0;
  for (const auto& [j, w] : levels_[depth_]) {
    if (w == 0.0) continue;
    const Box b = ParabolicCube(m(), leaf_generation(), j).box();
    double f = overlap_fraction(a.t_lo, a.t_hi, b.t_lo, b.t_hi);
    for (int i = 0; i < dim() && f > 0.0; ++i) f *= overlap_fraction(a.lo[i], a.hi[i], b.lo[i], b.hi[i]);
    total += w * f;
  }
  return total;
}

double TreeMeasure::max_growth_ratio() const {
  double worst = 0.0;
  for (int d = 0; d <= depth_; ++d) {
    const double cap = std::pow(side_of(m(), root_.k() + d), rho_);
    for (const auto& [j, w] : levels_[d]) worst = std::max(worst, w / cap);
  }
  return std::max(worst, sweep_total_ / std::pow(side_of(m(), root_.k()), rho_));
}

double TreeMeasure::additivity_defect() const {
  std::vector<std::map<Index, double>> sums(depth_ + 1);
  double worst = 0.0;
  for (int d = depth_ - 1; d >= 0; --d) {
    for (const auto& [j, w] : levels_[d + 1]) sums[d][parent_index(j, m())] += w;
    for (const auto& [j, w] : levels_[d]) {
      const double s = sums[d][j];
      if (w > 0.0) worst = std::max(worst, std::abs(w - s) / w);
    }
  }
  if (sweep_total_ > 0.0) worst = std::max(worst, std::abs(sweep_total_ - leaf_sum()) / sweep_total_);
  return worst;
}

nlohmann::json TreeMeasure::to_json() const {
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& [j, w] : levels_[depth_]) leaves.push_back({j, w});
  return {{"root", root_.literal()}, {"depth", depth_}, {"rho", rho_}, {"total", sweep_total_}, {"leaves", leaves}};
}

TreeMeasure TreeMeasure::from_json(const nlohmann::json& j, double rel_tol) {
  std::map<Index, double> leaves;
  for (const auto& e : j.at("leaves")) leaves[e.at(0).get<Index>()] = e.at(1).get<double>();
  TreeMeasure mu(ParabolicCube::parse(j.at("root").get<std::string>()), j.at("depth").get<int>(),
                 j.at("rho").get<double>(), std::move(leaves), j.at("total").get<double>());
  if (mu.additivity_defect() > rel_tol) throw std::invalid_argument("TreeMeasure: stored masses are not additive");
  if (mu.max_growth_ratio() > 1.0 + rel_tol) throw std::invalid_argument("TreeMeasure: growth bound violated");
  return mu;
}

TreeMeasure build_frostman(const GridSet& e, double rho, FrostmanTrace* trace) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("build_frostman: rho must be positive");
  if (e.empty()) throw std::invalid_argument("build_frostman: empty set");
  const int m = e.m();
  const int k0 = e.root().k();
  const int depth = e.depth();

  // Pre-rescale values and rescale factors per level, children summed in
  // sorted order.
  std::vector<std::map<Index, double>> value(depth + 1);
  std::vector<std::map<Index, double>> factor(depth + 1);
  const double leaf_cap = std::pow(side_of(m, k0 + depth), rho);
  for (const auto& j : e.level(depth)) {
    value[depth][j] = leaf_cap;
    factor[depth][j] = 1.0;
  }
  for (int d = depth - 1; d >= 0; --d) {
    for (const auto& [j, v] : value[d + 1]) value[d][parent_index(j, m)] += v;
    const double cap = std::pow(side_of(m, k0 + d), rho);
    for (auto& [j, v] : value[d]) {
      double f = 1.0;
      if (cap <= v) {
        f = cap / v;
        v = cap;
      }
      factor[d][j] = f;
      if (trace) trace->factors.push_back(f);
    }
  }

  std::vector<std::map<Index, double>> cum(depth + 1);
  cum[0] = factor[0];
  for (int d = 1; d <= depth; ++d)
    for (const auto& [j, f] : factor[d]) cum[d][j] = cum[d - 1].at(parent_index(j, m)) * f;

  std::map<Index, double> leaves;
  for (const auto& [j, c] : cum[depth]) leaves[j] = leaf_cap * c;
  return TreeMeasure(e.root(), depth, rho, std::move(leaves), value[0].begin()->second);
}

double frostman_diam_bound(const TreeMeasure& mu, const ParabolicRectangle& a) {
  return std::pow(3.0, mu.dim() + 1) * std::pow(mu.m(), mu.rho()) * std::pow(a.diam(), mu.rho());
}

bool frostman_diam_bound_check(const TreeMeasure& mu, const ParabolicRectangle& a) {
  return mu.measure(a) <= frostman_diam_bound(mu, a);
}

}  // namespace caloric

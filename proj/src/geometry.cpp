#include "caloric/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace caloric {

namespace {

void require_same_dim(int a, int b) {
  if (a != b) throw std::invalid_argument("dimension mismatch");
}

double interval_gap(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max({0.0, b_lo - a_hi, a_lo - b_hi});
}

// m^{-k} with a single rounding.
double inv_power(int m, int k) {
  if (k >= 0) return 1.0 / static_cast<double>(ipow(m, k));
  return static_cast<double>(ipow(m, -k));
}

double scaled(std::int64_t j, int m, int k) {
  if (k >= 0) return static_cast<double>(j) / static_cast<double>(ipow(m, k));
  return static_cast<double>(j) * static_cast<double>(ipow(m, -k));
}

}  // namespace

SpaceTimePoint::SpaceTimePoint(Vector x_, double t_) : x(std::move(x_)), t(t_) {
  if (x.size() < 1) throw std::invalid_argument("space dimension must be >= 1");
  if (!x.allFinite() || !std::isfinite(t)) throw std::invalid_argument("non-finite coordinate");
}

double p_dist(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  require_same_dim(a.dim(), b.dim());
  return std::max((a.x - b.x).norm(), std::sqrt(std::abs(a.t - b.t)));
}

double dist_infty(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  require_same_dim(a.dim(), b.dim());
  return std::max(2.0 * (a.x - b.x).cwiseAbs().maxCoeff(),
                  std::sqrt(2.0) * std::sqrt(std::abs(a.t - b.t)));
}

bool Box::contains(const SpaceTimePoint& p) const {
  require_same_dim(dim(), p.dim());
  return (p.x.array() >= lo.array()).all() && (p.x.array() <= hi.array()).all() &&
         p.t >= t_lo && p.t <= t_hi;
}

double gap(const Box& a, const Box& b) {
  require_same_dim(a.dim(), b.dim());
  double s2 = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double g = interval_gap(a.lo[i], a.hi[i], b.lo[i], b.hi[i]);
    s2 += g * g;
  }
  const double tg = interval_gap(a.t_lo, a.t_hi, b.t_lo, b.t_hi);
  return std::max(std::sqrt(s2), std::sqrt(tg));
}

double gap(std::span<const Box> a, std::span<const Box> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("gap of an empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, gap(x, y));
  return best;
}

double gap(const SpaceTimePoint& p, const Box& b) {
  Box pt{p.x, p.x, p.t, p.t};
  return gap(pt, b);
}

ParabolicRectangle::ParabolicRectangle(Vector corner, double t0, Vector sides, double time_side)
    : corner_(std::move(corner)), t0_(t0), sides_(std::move(sides)), time_side_(time_side) {
  if (corner_.size() < 1 || corner_.size() != sides_.size())
    throw std::invalid_argument("rectangle dimension mismatch");
  if ((sides_.array() <= 0.0).any() || !(time_side_ > 0.0))
    throw std::invalid_argument("rectangle side lengths must be positive");
}

ParabolicRectangle ParabolicRectangle::from_box(const Box& b) {
  return ParabolicRectangle(b.lo, b.t_lo, b.hi - b.lo, std::sqrt(b.t_hi - b.t_lo));
}

Box ParabolicRectangle::box() const { return Box{corner_, corner_ + sides_, t0_, t1()}; }

double ParabolicRectangle::volume() const { return sides_.prod() * duration(); }

double ParabolicRectangle::diam() const { return std::max(sides_.norm(), time_side_); }

bool ParabolicRectangle::contains(const SpaceTimePoint& p) const { return box().contains(p); }

bool ParabolicRectangle::inside_interior_of(const ParabolicRectangle& o) const {
  require_same_dim(dim(), o.dim());
  const Box a = box();
  const Box b = o.box();
  return (a.lo.array() > b.lo.array()).all() && (a.hi.array() < b.hi.array()).all() &&
         a.t_lo > b.t_lo && a.t_hi < b.t_hi;
}

std::int64_t ipow(std::int64_t base, int e) {
  if (e < 0) throw std::invalid_argument("negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / base)
      throw std::overflow_error("integer power overflow");
    r *= base;
  }
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Index child_index(const Index& parent, int m, const Index& offset) {
  Index c(parent.size());
  const std::size_t n = parent.size() - 1;
  for (std::size_t i = 0; i < n; ++i) c[i] = parent[i] * m + offset[i];
  c[n] = parent[n] * m * m + offset[n];
  return c;
}

Index parent_index(const Index& child, int m) {
  Index p(child.size());
  const std::size_t n = child.size() - 1;
  for (std::size_t i = 0; i < n; ++i) p[i] = floor_div(child[i], m);
  p[n] = floor_div(child[n], static_cast<std::int64_t>(m) * m);
  return p;
}

ParabolicCube::ParabolicCube(int m, int k, Index j) : m_(m), k_(k), j_(std::move(j)) {
  if (m_ < 2) throw std::invalid_argument("cube base m must be >= 2");
  if (j_.size() < 2) throw std::invalid_argument("cube index needs n+1 >= 2 entries");
}

ParabolicCube ParabolicCube::unit(int m, int n) { return ParabolicCube(m, 0, Index(n + 1, 0)); }

ParabolicCube ParabolicCube::parse(const std::string& literal) {
  const auto c1 = literal.find(':');
  const auto c2 = literal.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("bad cube literal: " + literal);
  try {
    std::size_t used = 0;
    const int m = std::stoi(literal.substr(0, c1), &used);
    if (used != c1) throw std::invalid_argument("m");
    const std::string ks = literal.substr(c1 + 1, c2 - c1 - 1);
    const int k = std::stoi(ks, &used);
    if (used != ks.size()) throw std::invalid_argument("k");
    Index j;
    std::stringstream ss(literal.substr(c2 + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("j");
      j.push_back(v);
    }
    return ParabolicCube(m, k, std::move(j));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad cube literal: " + literal);
  }
}

double ParabolicCube::side() const { return inv_power(m_, k_); }
double ParabolicCube::duration() const { return inv_power(m_, 2 * k_); }
double ParabolicCube::vol() const { return std::pow(side(), dim() + 2); }
double ParabolicCube::diam() const { return std::sqrt(static_cast<double>(dim())) * side(); }

Vector ParabolicCube::lower_corner() const {
  Vector c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = scaled(j_[i], m_, k_);
  return c;
}

double ParabolicCube::t_lo() const { return scaled(j_[dim()], m_, 2 * k_); }

Vector ParabolicCube::center() const {
  return lower_corner() + Vector::Constant(dim(), 0.5 * side());
}

SpaceTimePoint ParabolicCube::top_center() const {
  return SpaceTimePoint(center(), t_lo() + duration());
}

SpaceTimePoint ParabolicCube::mid_point() const {
  return SpaceTimePoint(center(), t_lo() + 0.5 * duration());
}

Box ParabolicCube::box() const {
  const Vector lo = lower_corner();
  return Box{lo, lo + Vector::Constant(dim(), side()), t_lo(), t_lo() + duration()};
}

std::vector<ParabolicCube> ParabolicCube::children() const {
  const int n = dim();
  std::vector<ParabolicCube> out;
  out.reserve(static_cast<std::size_t>(ipow(m_, n + 2)));
  Index off(n + 1, 0);
  const std::int64_t mt = static_cast<std::int64_t>(m_) * m_;
  while (true) {
    out.emplace_back(m_, k_ + 1, child_index(j_, m_, off));
    int i = n;
    while (i >= 0) {
      const std::int64_t lim = (i == n) ? mt : m_;
      if (++off[i] < lim) break;
      off[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

ParabolicCube ParabolicCube::parent() const { return ParabolicCube(m_, k_ - 1, parent_index(j_, m_)); }

ParabolicCube ParabolicCube::ancestor(int j) const {
  if (j < 0) throw std::invalid_argument("ancestor depth must be >= 0");
  ParabolicCube q = *this;
  for (int i = 0; i < j; ++i) q = q.parent();
  return q;
}

ParabolicCube ParabolicCube::child(const Index& offset) const {
  if (offset.size() != j_.size()) throw std::invalid_argument("offset dimension mismatch");
  for (std::size_t i = 0; i < offset.size(); ++i) {
    const std::int64_t lim = (i + 1 == offset.size()) ? std::int64_t(m_) * m_ : m_;
    if (offset[i] < 0 || offset[i] >= lim) throw std::invalid_argument("child offset out of range");
  }
  return ParabolicCube(m_, k_ + 1, child_index(j_, m_, offset));
}

bool ParabolicCube::is_descendant_of(const ParabolicCube& q) const {
  if (q.m_ != m_ || q.j_.size() != j_.size() || k_ < q.k_) return false;
  return ancestor(k_ - q.k_) == q;
}

bool ParabolicCube::contains(const SpaceTimePoint& p, Convention c) const {
  if (p.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  const Box b = box();
  auto in = [c](double v, double lo, double hi) {
    switch (c) {
      case Convention::HalfOpen: return v >= lo && v < hi;
      case Convention::Open: return v > lo && v < hi;
      case Convention::Closed: return v >= lo && v <= hi;
    }
    return false;
  };
  for (int i = 0; i < dim(); ++i)
    if (!in(p.x[i], b.lo[i], b.hi[i])) return false;
  return in(p.t, b.t_lo, b.t_hi);
}

std::string ParabolicCube::literal() const {
  std::ostringstream os;
  os << m_ << ':' << k_ << ':';
  for (std::size_t i = 0; i < j_.size(); ++i) os << (i ? "," : "") << j_[i];
  return os.str();
}

bool operator<(const ParabolicCube& a, const ParabolicCube& b) {
  if (a.m_ != b.m_) return a.m_ < b.m_;
  if (a.k_ != b.k_) return a.k_ < b.k_;
  return a.j_ < b.j_;
}

Box CubeTriple::q_box() const {
  const Vector h = Vector::Constant(dim(), 0.5 * r);
  return Box{z.x - h, z.x + h, z.t - r * r, z.t};
}

Box CubeTriple::f_box() const {
  return Box{z.x + s_lo, z.x + s_hi, z.t - eps * eps * r * r, z.t};
}

Box CubeTriple::qstar_box() const {
  const double e2 = eps * eps * r * r;
  return Box{z.x + s_lo, z.x + s_hi, z.t - 3.0 * e2, z.t - 2.0 * e2};
}

std::vector<Box> CubeTriple::normal_boundary() const {
  const Box q = q_box();
  std::vector<Box> faces;
  for (int i = 0; i < dim(); ++i) {
    Box lo = q;
    lo.hi[i] = lo.lo[i];
    Box hi = q;
    hi.lo[i] = hi.hi[i];
    faces.push_back(lo);
    faces.push_back(hi);
  }
  Box bottom = q;
  bottom.t_hi = bottom.t_lo;
  faces.push_back(bottom);
  return faces;
}

void CubeTriple::check_invariants(double tol) const {
  const int n = dim();
  if (!(r > 0.0)) throw std::invalid_argument("triple: side must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("triple: eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("triple: delta must lie in (0,1/2)");
  if (s_lo.size() != n || s_hi.size() != n) throw std::invalid_argument("triple: footprint dimension");
  const Vector w = s_hi - s_lo;
  if (((w.array() - eps * r).abs() > tol * r).any())
    throw std::invalid_argument("triple: Q_* is not a cube of side eps*r");
  const Box q = q_box();
  const Box qs = qstar_box();
  if ((qs.lo.array() < q.lo.array()).any() || (qs.hi.array() > q.hi.array()).any() ||
      qs.t_lo < q.t_lo || qs.t_hi > q.t_hi)
    throw std::invalid_argument("triple: Q_* not contained in Q");
  if (delta * delta < 6.0 * n * eps * eps * (1.0 - tol))
    throw std::invalid_argument("triple: eps/delta exceeds 1/sqrt(6n)");
  const auto nb = normal_boundary();
  const Box qs_arr[1] = {qs};
  if (gap(std::span<const Box>(qs_arr), std::span<const Box>(nb)) < delta * r * (1.0 - tol))
    throw std::invalid_argument("triple: gap(Q_*, normal boundary) below delta*r");
}

CubeTriple standard_triple(const ParabolicCube& q) {
  const int m = q.m();
  const int n = q.dim();
  if (m % 2 == 0) throw std::invalid_argument("standard triple needs odd m");
  if (static_cast<std::int64_t>(m - 1) * (m - 1) < 24LL * n)
    throw std::invalid_argument("standard triple needs m >= 1 + 2 sqrt(6n)");
  CubeTriple tr;
  tr.z = q.top_center();
  tr.r = q.side();
  tr.eps = 1.0 / m;
  tr.delta = static_cast<double>(m - 1) / (2.0 * m);
  Index off(n + 1, (m - 1) / 2);
  off[n] = static_cast<std::int64_t>(m) * m - 1;
  tr.pole_child = q.child(off);
  off[n] = static_cast<std::int64_t>(m) * m - 3;
  tr.target_child = q.child(off);
  tr.cube = q;
  tr.s_lo = tr.pole_child->lower_corner() - tr.z.x;
  tr.s_hi = tr.s_lo + Vector::Constant(n, tr.pole_child->side());
  tr.check_invariants(1e-9);
  return tr;
}

}  // namespace caloric

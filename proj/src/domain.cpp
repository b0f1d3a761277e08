#include "caloric/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace caloric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int footprint_dim(const Footprint& f) {
  return std::visit([](const auto& s) {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SpatialBox>)
      return static_cast<int>(s.lo.size());
    else
      return static_cast<int>(s.center.size());
  }, f);
}

double time_gap(double t, double lo, double hi) { return std::max({0.0, lo - t, t - hi}); }

}  // namespace

bool same_box(const Box& a, const Box& b) {
  return a.lo == b.lo && a.hi == b.hi && a.t_lo == b.t_lo && a.t_hi == b.t_hi;
}

SpaceTimeDomain::SpaceTimeDomain(Footprint footprint, double t_lo, double t_hi)
    : dim_(footprint_dim(footprint)), footprint_(std::move(footprint)), t_lo_(t_lo), t_hi_(t_hi) {
  if (dim_ < 1) throw std::invalid_argument("domain: space dimension must be >= 1");
  if (!(t_lo_ < t_hi_) || std::isnan(t_lo_) || std::isnan(t_hi_))
    throw std::invalid_argument("domain: empty time interval");
  if (auto* b = std::get_if<SpatialBox>(&footprint_)) {
    if (b->hi.size() != dim_ || !(b->lo.array() < b->hi.array()).all() || !b->lo.allFinite() || !b->hi.allFinite())
      throw std::invalid_argument("domain: empty or unbounded spatial box");
  } else {
    const auto& s = std::get<SpatialBall>(footprint_);
    if (!(s.radius > 0.0) || !std::isfinite(s.radius) || !s.center.allFinite())
      throw std::invalid_argument("domain: bad ball");
  }
  rebuild_events();
}

SpaceTimeDomain SpaceTimeDomain::open_cube(const SpaceTimePoint& z, double side) {
  const Vector h = Vector::Constant(z.dim(), 0.5 * side);
  return SpaceTimeDomain(SpatialBox{z.x - h, z.x + h}, z.t - side * side, z.t);
}

SpaceTimeDomain SpaceTimeDomain::box_cylinder(Vector lo, Vector hi, double t_lo, double t_hi) {
  return SpaceTimeDomain(SpatialBox{std::move(lo), std::move(hi)}, t_lo, t_hi);
}

SpaceTimeDomain SpaceTimeDomain::ball_cylinder(Vector center, double radius, double t_lo, double t_hi) {
  return SpaceTimeDomain(SpatialBall{std::move(center), radius}, t_lo, t_hi);
}

SpaceTimeDomain SpaceTimeDomain::with_obstacle(const ParabolicRectangle& h) const {
  if (h.dim() != dim_) throw std::invalid_argument("domain: obstacle dimension mismatch");
  SpaceTimeDomain d = *this;
  d.obstacles_.push_back(h.box());
  d.rebuild_events();
  return d;
}

SpaceTimeDomain SpaceTimeDomain::with_obstacles(const std::vector<ParabolicRectangle>& hs) const {
  SpaceTimeDomain d = *this;
  for (const auto& h : hs) {
    if (h.dim() != dim_) throw std::invalid_argument("domain: obstacle dimension mismatch");
    d.obstacles_.push_back(h.box());
  }
  d.rebuild_events();
  return d;
}

void SpaceTimeDomain::rebuild_events() {
  events_.clear();
  if (std::isfinite(t_lo_)) events_.push_back(t_lo_);
  for (const auto& o : obstacles_) {
    events_.push_back(o.t_lo);
    events_.push_back(o.t_hi);
  }
  std::sort(events_.begin(), events_.end());
  events_.erase(std::unique(events_.begin(), events_.end()), events_.end());
}

bool SpaceTimeDomain::in_footprint(const Vector& x) const {
  if (auto* b = std::get_if<SpatialBox>(&footprint_))
    return (x.array() > b->lo.array()).all() && (x.array() < b->hi.array()).all();
  const auto& s = std::get<SpatialBall>(footprint_);
  return (x - s.center).norm() < s.radius;
}

bool SpaceTimeDomain::in_container(const SpaceTimePoint& p) const {
  if (p.dim() != dim_) throw std::invalid_argument("domain: point dimension mismatch");
  return p.t > t_lo_ && p.t < t_hi_ && in_footprint(p.x);
}

bool SpaceTimeDomain::contains(const SpaceTimePoint& p) const {
  if (!in_container(p)) return false;
  for (const auto& o : obstacles_)
    if (o.contains(p)) return false;
  return true;
}

double SpaceTimeDomain::boundary_distance(const SpaceTimePoint& p) const {
  if (p.dim() != dim_) throw std::invalid_argument("domain: point dimension mismatch");
  double best = kInf;
  const double tg = time_gap(p.t, t_lo_, t_hi_);
  if (auto* b = std::get_if<SpatialBox>(&footprint_)) {
    for (int i = 0; i < dim_; ++i) {
      for (int side = 0; side < 2; ++side) {
        Box f{b->lo, b->hi, t_lo_, t_hi_};
        const double v = side ? b->hi[i] : b->lo[i];
        f.lo[i] = v;
        f.hi[i] = v;
        best = std::min(best, gap(p, f));
      }
    }
    if (std::isfinite(t_lo_)) best = std::min(best, gap(p, Box{b->lo, b->hi, t_lo_, t_lo_}));
  } else {
    const auto& s = std::get<SpatialBall>(footprint_);
    const double r = (p.x - s.center).norm();
    best = std::min(best, std::max(std::abs(s.radius - r), std::sqrt(tg)));
    if (std::isfinite(t_lo_))
      best = std::min(best, std::max(std::max(0.0, r - s.radius), std::sqrt(std::abs(p.t - t_lo_))));
  }
  for (const auto& o : obstacles_) {
    best = std::min(best, gap(p, Box{o.lo, o.hi, o.t_hi, o.t_hi}));
    for (int i = 0; i < dim_; ++i) {
      for (int side = 0; side < 2; ++side) {
        Box f = o;
        const double v = side ? o.hi[i] : o.lo[i];
        f.lo[i] = v;
        f.hi[i] = v;
        best = std::min(best, gap(p, f));
      }
    }
  }
  return best;
}

double SpaceTimeDomain::feature_size() const {
  double f = kInf;
  if (auto* b = std::get_if<SpatialBox>(&footprint_))
    f = (b->hi - b->lo).minCoeff();
  else
    f = 2.0 * std::get<SpatialBall>(footprint_).radius;
  if (std::isfinite(t_hi_ - t_lo_)) f = std::min(f, std::sqrt(t_hi_ - t_lo_));
  for (const auto& o : obstacles_) {
    f = std::min(f, (o.hi - o.lo).minCoeff());
    f = std::min(f, std::sqrt(o.t_hi - o.t_lo));
  }
  return f;
}

double SpaceTimeDomain::default_dt() const {
  const double f = feature_size();
  return f * f / 400.0;
}

bool SpaceTimeDomain::nested_in(const SpaceTimeDomain& other) const {
  if (other.dim_ != dim_) return false;
  if (t_lo_ < other.t_lo_ || t_hi_ > other.t_hi_) return false;
  bool inside = false;
  const auto* b = std::get_if<SpatialBox>(&footprint_);
  const auto* ob = std::get_if<SpatialBox>(&other.footprint_);
  if (b && ob) {
    inside = (b->lo.array() >= ob->lo.array()).all() && (b->hi.array() <= ob->hi.array()).all();
  } else if (!b && !ob) {
    const auto& s = std::get<SpatialBall>(footprint_);
    const auto& os = std::get<SpatialBall>(other.footprint_);
    inside = (s.center - os.center).norm() + s.radius <= os.radius;
  } else if (b) {
    const auto& os = std::get<SpatialBall>(other.footprint_);
    const Vector far = (b->lo - os.center).cwiseAbs().cwiseMax((b->hi - os.center).cwiseAbs());
    inside = far.norm() <= os.radius;
  } else {
    const auto& s = std::get<SpatialBall>(footprint_);
    inside = ((s.center.array() - s.radius) >= ob->lo.array()).all() &&
             ((s.center.array() + s.radius) <= ob->hi.array()).all();
  }
  if (!inside) return false;
  for (const auto& o : other.obstacles_) {
    const bool found = std::any_of(obstacles_.begin(), obstacles_.end(), [&](const Box& x) { return same_box(x, o); });
    if (!found) return false;
  }
  return true;
}

bool operator==(const SpaceTimeDomain& a, const SpaceTimeDomain& b) {
  if (a.dim_ != b.dim_ || a.t_lo_ != b.t_lo_ || a.t_hi_ != b.t_hi_) return false;
  if (a.obstacles_.size() != b.obstacles_.size()) return false;
  for (std::size_t i = 0; i < a.obstacles_.size(); ++i)
    if (!same_box(a.obstacles_[i], b.obstacles_[i])) return false;
  if (a.footprint_.index() != b.footprint_.index()) return false;
  if (auto* x = std::get_if<SpatialBox>(&a.footprint_)) {
    const auto& y = std::get<SpatialBox>(b.footprint_);
    return x->lo == y.lo && x->hi == y.hi;
  }
  const auto& x = std::get<SpatialBall>(a.footprint_);
  const auto& y = std::get<SpatialBall>(b.footprint_);
  return x.center == y.center && x.radius == y.radius;
}

}  // namespace caloric

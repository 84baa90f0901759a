#include "riskplan/geometry.hpp"

#include <algorithm>
#include <limits>

#include "riskplan/errors.hpp"

namespace riskplan {

namespace {
constexpr double kDegenerateArea = 1e-12;
constexpr double kConvexityTol = 1e-9;
}  // namespace

double NormalizeAngle(double angle) {
  double a = std::fmod(angle + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

double PointSegmentDistance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.SquaredNorm();
  if (len2 == 0.0) return (p - a).Norm();
  double t = (p - a).Dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + ab * t)).Norm();
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw ValidationError("footprint: needs at least 3 vertices");
  }
  double twice_area = 0.0;
  for (size_t i = 0; i < vertices_.size(); ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % vertices_.size()];
    twice_area += a.Cross(b);
  }
  if (std::abs(twice_area) < kDegenerateArea) {
    throw ValidationError("footprint: degenerate polygon (zero area)");
  }
  if (twice_area < 0.0) std::reverse(vertices_.begin(), vertices_.end());
  const size_t n = vertices_.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 e1 = vertices_[(i + 1) % n] - vertices_[i];
    const Vec2 e2 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    if (e1.Cross(e2) < -kConvexityTol) {
      throw ValidationError("footprint: polygon is not convex");
    }
  }
}

double ConvexPolygon::Area() const {
  double twice_area = 0.0;
  for (size_t i = 0; i < vertices_.size(); ++i) {
    twice_area += vertices_[i].Cross(vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * twice_area;
}

bool ConvexPolygon::Contains(const Vec2& p) const {
  const size_t n = vertices_.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 edge = vertices_[(i + 1) % n] - vertices_[i];
    if (edge.Cross(p - vertices_[i]) < 0.0) return false;
  }
  return true;
}

double ConvexPolygon::Distance(const Vec2& p) const {
  const size_t n = vertices_.size();
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    if (inside && (b - a).Cross(p - a) < 0.0) inside = false;
    best = std::min(best, PointSegmentDistance(p, a, b));
  }
  return inside ? 0.0 : best;
}

ConvexPolygon ConvexPolygon::TransformedBy(const Pose2& pose) const {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  std::vector<Vec2> out;
  out.reserve(vertices_.size());
  for (const Vec2& v : vertices_) {
    out.push_back({pose.position.x + c * v.x - s * v.y,
                   pose.position.y + s * v.x + c * v.y});
  }
  ConvexPolygon poly;
  poly.vertices_ = std::move(out);  // rigid transform preserves validity
  return poly;
}

void ConvexPolygon::AxisAlignedBounds(Vec2* lo, Vec2* hi) const {
  lo->x = lo->y = std::numeric_limits<double>::infinity();
  hi->x = hi->y = -std::numeric_limits<double>::infinity();
  for (const Vec2& v : vertices_) {
    lo->x = std::min(lo->x, v.x);
    lo->y = std::min(lo->y, v.y);
    hi->x = std::max(hi->x, v.x);
    hi->y = std::max(hi->y, v.y);
  }
}

double ConvexPolygon::MaxX() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Vec2& v : vertices_) m = std::max(m, v.x);
  return m;
}

double ConvexPolygon::MinX() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Vec2& v : vertices_) m = std::min(m, v.x);
  return m;
}

namespace {

// Projects both polygons onto `axis` and reports whether the intervals are
// disjoint.
bool SeparatedAlong(const Vec2& axis, const ConvexPolygon& a, const ConvexPolygon& b) {
  double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo;
  for (const Vec2& v : a.vertices()) {
    const double d = v.Dot(axis);
    a_lo = std::min(a_lo, d);
    a_hi = std::max(a_hi, d);
  }
  double b_lo = std::numeric_limits<double>::infinity(), b_hi = -b_lo;
  for (const Vec2& v : b.vertices()) {
    const double d = v.Dot(axis);
    b_lo = std::min(b_lo, d);
    b_hi = std::max(b_hi, d);
  }
  return a_hi < b_lo || b_hi < a_lo;
}

}  // namespace

bool PolygonsIntersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  const auto check_axes = [&](const ConvexPolygon& poly) {
    const auto& verts = poly.vertices();
    for (size_t i = 0; i < verts.size(); ++i) {
      const Vec2 edge = verts[(i + 1) % verts.size()] - verts[i];
      const Vec2 axis{-edge.y, edge.x};
      if (SeparatedAlong(axis, a, b)) return true;
    }
    return false;
  };
  return !(check_axes(a) || check_axes(b));
}

double PolygonDistance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (PolygonsIntersect(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const auto vertex_to_edges = [&best](const ConvexPolygon& pts, const ConvexPolygon& poly) {
    const auto& verts = poly.vertices();
    for (const Vec2& p : pts.vertices()) {
      for (size_t i = 0; i < verts.size(); ++i) {
        best = std::min(best, PointSegmentDistance(p, verts[i], verts[(i + 1) % verts.size()]));
      }
    }
  };
  vertex_to_edges(a, b);
  vertex_to_edges(b, a);
  return best;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw ValidationError("polyline: needs at least 2 points");
  }
  cumulative_.resize(points_.size());
  cumulative_[0] = 0.0;
  for (size_t i = 1; i < points_.size(); ++i) {
    const double seg = (points_[i] - points_[i - 1]).Norm();
    if (seg <= 0.0) {
      throw ValidationError("polyline: repeated point (arc length must increase)");
    }
    cumulative_[i] = cumulative_[i - 1] + seg;
  }
}

Polyline::Projection Polyline::Project(const Vec2& p) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < points_.size(); ++i) {
    const Vec2& a = points_[i];
    const Vec2& b = points_[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.SquaredNorm();
    double t = (p - a).Dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 foot = a + ab * t;
    const double d = (p - foot).Norm();
    if (d < best.distance) {
      best.distance = d;
      best.segment = static_cast<int>(i);
      best.s = cumulative_[i] + t * std::sqrt(len2);
      const double side = ab.Cross(p - a);
      best.lateral = side >= 0.0 ? d : -d;
    }
  }
  return best;
}

Vec2 Polyline::Eval(double s) const {
  if (s <= 0.0) return points_[0];
  if (s >= Length()) {
    const size_t n = points_.size();
    const Vec2 dir = points_[n - 1] - points_[n - 2];
    return points_[n - 1] + dir * ((s - Length()) / dir.Norm());
  }
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const size_t i = static_cast<size_t>(it - cumulative_.begin()) - 1;
  const double t = (s - cumulative_[i]) / (cumulative_[i + 1] - cumulative_[i]);
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

double Polyline::TangentAt(double s) const {
  size_t i = 0;
  if (s >= Length()) {
    i = points_.size() - 2;
  } else if (s > 0.0) {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    i = static_cast<size_t>(it - cumulative_.begin()) - 1;
  }
  const Vec2 dir = points_[i + 1] - points_[i];
  return std::atan2(dir.y, dir.x);
}

void Polyline::AxisAlignedBounds(Vec2* lo, Vec2* hi) const {
  lo->x = lo->y = std::numeric_limits<double>::infinity();
  hi->x = hi->y = -std::numeric_limits<double>::infinity();
  for (const Vec2& v : points_) {
    lo->x = std::min(lo->x, v.x);
    lo->y = std::min(lo->y, v.y);
    hi->x = std::max(hi->x, v.x);
    hi->y = std::max(hi->y, v.y);
  }
}

}  // namespace riskplan

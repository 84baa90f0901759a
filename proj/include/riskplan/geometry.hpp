#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace riskplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const = default;

  double Dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double Cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double SquaredNorm() const { return x * x + y * y; }
  double Norm() const { return std::hypot(x, y); }
};

// Wraps an angle into (-pi, pi]; -pi maps to +pi.
double NormalizeAngle(double angle);

inline Vec2 UnitVector(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Left-hand normal of the direction `angle` points in.
inline Vec2 LeftNormal(double angle) { return {-std::sin(angle), std::cos(angle)}; }

struct Pose2 {
  Vec2 position;
  double heading = 0.0;  // radians in (-pi, pi]

  static Pose2 Make(double x, double y, double heading) {
    return {{x, y}, NormalizeAngle(heading)};
  }
  bool operator==(const Pose2& o) const = default;
};

double PointSegmentDistance(const Vec2& p, const Vec2& a, const Vec2& b);

// Convex polygon with counter-clockwise vertices. Construction validates
// convexity and non-degeneracy (positive area); clockwise input is reversed.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  double Area() const;
  bool Contains(const Vec2& p) const;

  // 0 inside or on the boundary, else distance to the nearest edge.
  double Distance(const Vec2& p) const;

  // Rigid transform into the frame given by `pose` (rotate, then translate).
  ConvexPolygon TransformedBy(const Pose2& pose) const;

  void AxisAlignedBounds(Vec2* lo, Vec2* hi) const;

  // Extents along the local axes of an axis-aligned footprint.
  double MaxX() const;
  double MinX() const;

 private:
  std::vector<Vec2> vertices_;
};

// Separating-axis intersection test for convex polygons (touch counts as
// intersection).
bool PolygonsIntersect(const ConvexPolygon& a, const ConvexPolygon& b);

// 0 if the polygons intersect, else the smallest vertex-to-edge gap.
double PolygonDistance(const ConvexPolygon& a, const ConvexPolygon& b);

// Open polyline with a cumulative arc-length table.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  double Length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  struct Projection {
    double s = 0.0;        // arc length of the foot point
    double lateral = 0.0;  // signed offset, positive left of travel direction
    double distance = 0.0; // unsigned distance to the polyline
    int segment = 0;
  };
  Projection Project(const Vec2& p) const;

  // Point at arc length s; clamped at s <= 0, extrapolated along the final
  // segment beyond the end.
  Vec2 Eval(double s) const;
  double TangentAt(double s) const;

  double Distance(const Vec2& p) const { return Project(p).distance; }
  void AxisAlignedBounds(Vec2* lo, Vec2* hi) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

}  // namespace riskplan

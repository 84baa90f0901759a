#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riskplan/geometry.hpp"

namespace riskplan {

enum class ObjectKind { kVehicle, kPedestrian, kTruck };
enum class StaticKind { kLaneLine, kBarrier };

std::string ToString(ObjectKind kind);
std::string ToString(StaticKind kind);

// A moving (or movable) object. `footprint` is a convex polygon in the
// object frame containing the origin; `width` is the lateral extent used by
// the elliptic distance weighting of the motion field.
struct DynamicObject {
  std::string id;
  ObjectKind kind = ObjectKind::kVehicle;
  double mass = 0.0;   // kg
  double width = 0.0;  // m
  ConvexPolygon footprint;
  Pose2 pose;
  double speed = 0.0;  // m/s along heading

  Vec2 Velocity() const { return UnitVector(pose.heading) * speed; }
  ConvexPolygon WorldFootprint() const { return footprint.TransformedBy(pose); }
  // 0 inside the world-frame footprint, else distance to its boundary.
  double DistanceTo(const Vec2& p) const { return WorldFootprint().Distance(p); }
  double HalfLength() const { return 0.5 * (footprint.MaxX() - footprint.MinX()); }
};

// Longitudinal/lateral offsets of `p` in the frame of `obj` (origin at the
// object's pose position, x along its heading, y to its left).
struct FrenetOffsets {
  double lon = 0.0;
  double lat = 0.0;
};
FrenetOffsets FrenetOffsetsOf(const Vec2& p, const Pose2& obj_pose);

// An immovable field source anchored to a polyline: painted lane lines keep
// a soft corridor, barriers are effectively impassable.
struct StaticObject {
  std::string id;
  StaticKind kind = StaticKind::kLaneLine;
  Polyline shape;
  double width = 0.0;      // influence base width D, m
  double stiffness = 0.0;  // k_s
};

struct Lane {
  std::string id;
  double width = 0.0;
  Polyline centerline;
  std::vector<int> successors;  // indices into LaneGraph::lanes
};

class LaneGraph {
 public:
  std::vector<Lane> lanes;

  struct Match {
    int lane = -1;
    Polyline::Projection projection;
  };
  // Nearest lane by centerline distance; nullopt on an empty graph.
  std::optional<Match> NearestLane(const Vec2& p) const;

  // True when p lies within one lane width of some centerline.
  bool OnLane(const Vec2& p) const;

  struct ArcPoint {
    Vec2 position;
    double tangent = 0.0;
    int lane = -1;
    double s = 0.0;
  };
  // Walks `advance` meters along centerlines from (lane, s0), following the
  // first successor at lane ends and extrapolating past terminal lanes.
  ArcPoint Advance(int lane, double s0, double advance) const;
};

// Scripted agent motion, resampled onto the simulation tick at load time.
struct AgentScript {
  struct Keyframe {
    double t = 0.0;
    Pose2 pose;
  };
  std::vector<Keyframe> keyframes;  // as authored, strictly increasing t
  double tick = 0.1;
  std::vector<Pose2> poses;   // resampled at k * tick
  std::vector<double> speeds; // forward differences of resampled positions

  Pose2 PoseAt(double t) const;
  double SpeedAt(double t) const;
  void Resample(double duration, double tick_s);
};

struct Agent {
  DynamicObject object;
  AgentScript script;

  DynamicObject StateAt(double t) const {
    DynamicObject o = object;
    o.pose = script.PoseAt(t);
    o.speed = script.SpeedAt(t);
    return o;
  }
};

struct Scenario {
  LaneGraph map;
  std::vector<StaticObject> static_objects;
  DynamicObject ego;
  std::vector<Agent> agents;
  Pose2 target;
  double speed_limit = 0.0;
  double duration = 0.0;

  // Agent snapshots at time t.
  std::vector<DynamicObject> AgentStates(double t) const;
};

}  // namespace riskplan

#include "riskplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskplan/errors.hpp"

namespace riskplan {

std::string ToString(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kVehicle: return "vehicle";
    case ObjectKind::kPedestrian: return "pedestrian";
    case ObjectKind::kTruck: return "truck";
  }
  return "vehicle";
}

std::string ToString(StaticKind kind) {
  return kind == StaticKind::kLaneLine ? "lane_line" : "barrier";
}

FrenetOffsets FrenetOffsetsOf(const Vec2& p, const Pose2& obj_pose) {
  const Vec2 d = p - obj_pose.position;
  const Vec2 u = UnitVector(obj_pose.heading);
  return {d.Dot(u), d.Dot(LeftNormal(obj_pose.heading))};
}

std::optional<LaneGraph::Match> LaneGraph::NearestLane(const Vec2& p) const {
  std::optional<Match> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < lanes.size(); ++i) {
    const auto proj = lanes[i].centerline.Project(p);
    if (proj.distance < best_dist) {
      best_dist = proj.distance;
      best = Match{static_cast<int>(i), proj};
    }
  }
  return best;
}

bool LaneGraph::OnLane(const Vec2& p) const {
  for (const Lane& lane : lanes) {
    if (lane.centerline.Distance(p) <= lane.width) return true;
  }
  return false;
}

LaneGraph::ArcPoint LaneGraph::Advance(int lane, double s0, double advance) const {
  int current = lane;
  double s = s0 + advance;
  while (s > lanes[current].centerline.Length() && !lanes[current].successors.empty()) {
    s -= lanes[current].centerline.Length();
    current = lanes[current].successors.front();
  }
  ArcPoint out;
  out.lane = current;
  out.s = s;
  out.position = lanes[current].centerline.Eval(s);
  out.tangent = lanes[current].centerline.TangentAt(s);
  return out;
}

namespace {

// Shortest-arc linear interpolation of headings.
double LerpAngle(double a, double b, double t) {
  return NormalizeAngle(a + NormalizeAngle(b - a) * t);
}

Pose2 LerpPose(const Pose2& a, const Pose2& b, double t) {
  return {{a.position.x + (b.position.x - a.position.x) * t,
           a.position.y + (b.position.y - a.position.y) * t},
          LerpAngle(a.heading, b.heading, t)};
}

}  // namespace

void AgentScript::Resample(double duration, double tick_s) {
  tick = tick_s;
  const int n = static_cast<int>(std::floor(duration / tick_s + 0.5)) + 1;
  poses.resize(n);
  speeds.assign(n, 0.0);
  size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double t = std::min(k * tick_s, duration);
    while (seg + 2 < keyframes.size() && keyframes[seg + 1].t < t) ++seg;
    const Keyframe& a = keyframes[seg];
    const Keyframe& b = keyframes[seg + 1];
    const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    poses[k] = LerpPose(a.pose, b.pose, u);
  }
  for (int k = 0; k + 1 < n; ++k) {
    speeds[k] = (poses[k + 1].position - poses[k].position).Norm() / tick_s;
  }
  if (n >= 2) speeds[n - 1] = speeds[n - 2];
}

Pose2 AgentScript::PoseAt(double t) const {
  if (poses.empty()) return {};
  const double idx = std::max(t, 0.0) / tick;
  const int k = std::min(static_cast<int>(idx), static_cast<int>(poses.size()) - 1);
  if (k + 1 >= static_cast<int>(poses.size())) return poses.back();
  return LerpPose(poses[k], poses[k + 1], idx - k);
}

double AgentScript::SpeedAt(double t) const {
  if (speeds.empty()) return 0.0;
  const int k = std::min(static_cast<int>(std::max(t, 0.0) / tick),
                         static_cast<int>(speeds.size()) - 1);
  return speeds[k];
}

std::vector<DynamicObject> Scenario::AgentStates(double t) const {
  std::vector<DynamicObject> out;
  out.reserve(agents.size());
  for (const Agent& a : agents) out.push_back(a.StateAt(t));
  return out;
}

}  // namespace riskplan

#pragma once

#include <array>
#include <span>
#include <vector>

#include "riskplan/grid.hpp"
#include "riskplan/params.hpp"
#include "riskplan/scenario.hpp"

namespace riskplan {

struct PathSample {
  double s = 0.0;
  Vec2 position;
  double heading = 0.0;
  double curvature = 0.0;
};

// One lateral candidate: a cubic Bezier from the ego pose to a cross-section
// point `endpoint_offset` meters left of the drivable-corridor center at the
// lookahead distance. Index 0 is the rightmost candidate.
struct CandidatePath {
  int index = -1;
  std::array<Vec2, 4> control;
  double endpoint_offset = 0.0;
  std::vector<PathSample> samples;  // spacing <= the configured sample step

  double Length() const { return samples.back().s; }
  // Interpolated sample; s < 0 clamps, s past the end extrapolates straight
  // along the final heading with zero curvature.
  PathSample At(double s) const;
};

// Evenly spaced lateral candidates across the drivable corridor at the
// lookahead cross-section, shrunk by half the vehicle width on each side.
// The corridor is the merged lateral span of the lane chain the ego is on,
// measured perpendicular to the lane direction. Lookahead is
// max(min_lookahead, speed * frames * dt). Throws PlanningError off-map.
std::vector<CandidatePath> SamplePaths(const LaneGraph& map, const DynamicObject& ego,
                                       const Params& params);

// Arc-length slicing: boundaries advance max(speed, v_floor) * dt meters per
// frame; arcs past the last boundary land in the final slice.
int SliceIndex(double s, double speed, const Params& params);

// Highest grid value within `radius` of any path sample with arc in
// [s_begin, s_end). Samples outside the grid count as e_max; cells outside
// the grid are skipped.
double MaxRiskAlong(const RiskGrid& grid, const CandidatePath& path, double s_begin, double s_end,
                    double radius, double e_max);

// Linear ramp from full speed at risk <= r_free down to zero at r_stop.
double SpeedFromRisk(double risk, double s_max, const PlannerParams& pp);

struct SliceEvaluation {
  double max_risk = 0.0;
  double risk_speed = 0.0;
  double curvature_speed = 0.0;  // sqrt(a_lat_max / max |curvature|)
  double speed = 0.0;            // min of the above, capped at the limit
};

struct PathEvaluation {
  int path_index = -1;
  std::vector<SliceEvaluation> slices;  // one per stack frame
  double plan_speed = 0.0;              // min over slices
  int first_blocked_slice = -1;         // -1 when no slice speed is zero
};

struct TrajectoryPoint {
  double t = 0.0;
  Pose2 pose;
  double speed = 0.0;
  double accel = 0.0;  // longitudinal command that produced this point
};

struct PlannedTrajectory {
  std::vector<TrajectoryPoint> points;  // one per simulation tick
  bool emergency = false;

  TrajectoryPoint StateAt(double t) const;
  double Duration() const { return points.empty() ? 0.0 : points.back().t; }
};

struct PlanResult {
  int selected_index = -1;
  double plan_speed = 0.0;
  bool emergency = false;
  std::vector<PathEvaluation> evaluations;
  CandidatePath path;
  PlannedTrajectory trajectory;
};

// Evaluates slice j of every candidate against stack frame j, ranks by
// (plan speed, latest first-blocked slice, |endpoint offset|, index) and
// builds a tick-sampled trajectory along the winner. Deceleration plans with
// the cruise ramp; when that cannot reach a stop arc in time the profile is
// flagged emergency and brakes as hard as the emergency limit allows.
PlanResult Plan(const RiskStack& stack, std::span<const CandidatePath> paths,
                const DynamicObject& ego, double speed_limit, const Params& params);

}  // namespace riskplan

#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/params.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/scenario.hpp"

namespace riskplan {

struct EgoState {
  Pose2 pose;
  double speed = 0.0;
  double accel = 0.0;  // realized longitudinal acceleration, m/s^2
  double steer = 0.0;  // front-wheel angle, rad
};

// Pure-pursuit steering toward the trajectory geometry, clamped to the
// mechanical steer limit and to the comfort lateral-acceleration envelope.
double PurePursuitSteer(const EgoState& state, const PlannedTrajectory& traj,
                        const TrackerParams& tp, const ComfortParams& cp);

// Kinematic bicycle integration over one tick. Position advances along the
// current heading before the heading turns, so straight driving is exact.
EgoState IntegrateBicycle(const EgoState& state, double steer, double accel, double dt,
                          const TrackerParams& tp);

struct TickRecord {
  double t = 0.0;
  Pose2 pose;
  double speed = 0.0;
  double accel = 0.0;      // longitudinal, from the step into this tick
  double lat_accel = 0.0;  // v^2 * tan(steer) / wheelbase
  double steer = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double risk_here = 0.0;  // combined field at the ego center
  int selected_path = -1;
  double plan_speed = 0.0;
  bool emergency = false;
};

struct CycleTiming {
  double t = 0.0;
  double predict_ms = 0.0;
  double stack_ms = 0.0;
  double plan_ms = 0.0;
};

struct RunMetrics {
  bool collision = false;
  double collision_time = -1.0;
  bool reached_target = false;
  double completion_time = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_abs_lon_accel = 0.0;
  double max_abs_lat_accel = 0.0;
  double peak_decel = 0.0;         // largest braking magnitude
  double first_decel_time = -1.0;  // first tick braking harder than -0.3
  double avg_speed = 0.0;
  std::vector<TickRecord> ticks;
  // Wall-clock numbers; reported separately and never part of the
  // determinism-checked artifacts.
  std::vector<CycleTiming> timings;
};

struct SimOptions {
  std::filesystem::path out_dir;  // empty: no files written
  bool dump_grids = false;        // write the current-time grid every cycle
  int workers = 0;                // 0: use params.sim.workers
};

// Closed loop: predict -> risk stack -> plan every replan period, bicycle
// step every tick, until the duration elapses, the target circle is reached,
// or footprints collide. Deterministic for a given scenario + parameters,
// independent of the worker count.
RunMetrics RunScenario(const Scenario& scenario, const Params& params,
                       const SimOptions& options = {});

// Bumper-to-bumper time to collision against an agent ahead in the ego's
// lane; nullopt when the agent is in another lane, behind, or not closing.
std::optional<double> LeadTimeToCollision(const DynamicObject& ego, const DynamicObject& agent,
                                          const LaneGraph& map);

// Fixed-threshold baseline: ride the lane centerline at the speed limit and
// brake hard once the time-to-collision of a same-lane lead drops below the
// threshold.
struct TtcPolicyConfig {
  double threshold = 2.0;  // s
  double brake = 1.5;      // m/s^2
};
RunMetrics RunTtcPolicy(const Scenario& scenario, const Params& params,
                        const TtcPolicyConfig& cfg = {});

struct TtcComparison {
  RunMetrics risk;
  RunMetrics ttc;
};
TtcComparison CompareTtc(const Scenario& scenario, const Params& params,
                         const SimOptions& options = {});

// Human-readable summary block (no wall-clock content).
std::string FormatReport(const RunMetrics& metrics);

// Timing aggregates for terminals; wall clock, varies run to run.
std::string FormatTimings(const RunMetrics& metrics);

// Nearest-rank percentile, q in [0, 1]; values need not be sorted.
double Percentile(std::vector<double> values, double q);

}  // namespace riskplan

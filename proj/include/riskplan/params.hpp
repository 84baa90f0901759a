#pragma once

#include <filesystem>
#include <string>

namespace riskplan {

// Gains of the distance-decay (potential) part of the object energy field.
// virtual mass M_v = m * T * (alpha * v^beta + gamma)
// potential    pE  = k * r_a * M_v / (D^k1 + k * r_a * M_v / e_max)
struct PotentialParams {
  double k = 0.0015;
  double r_a = 1.0;
  double k1 = 1.0;
  double e_max = 100.0;
  double t_scale = 1.0;   // T
  double alpha = 0.1;
  double beta = 1.2;
  double gamma = 1.0;
  // Objects farther than this from the evaluation point contribute nothing.
  double cutoff = 200.0;
};

// Motion (kinetic) part, active in a forward wedge of the moving object.
struct KineticParams {
  double horizon = 3.0;  // t in kE's reachable-distance bound v_r * t
  double v_min = 0.1;    // relative speeds at or below this give no field
};

struct StaticFieldParams {
  double kappa = 2.0;  // influence band half-width multiplier on object width
};

struct GridParams {
  double ahead = 100.0;
  double behind = 20.0;
  double half_width = 20.0;
  double resolution = 0.5;
};

struct StackParams {
  double dt = 0.5;
  int frames = 7;
};

struct PredictorParams {
  int history_capacity = 30;
  double history_tick = 0.1;
  double horizon = 3.5;       // one of {2.0, 3.5, 6.0}
  int fit_window = 5;
  double min_yaw_rate = 1e-3; // below this CTRV degrades to straight-line
  double feature_spacing = 2.0;
};

struct PlannerParams {
  int n_paths = 9;
  double r_free = 5.0;
  double r_stop = 60.0;
  double v_floor = 1.0;      // slice-spacing floor, m/s
  double min_lookahead = 20.0;
  double sample_spacing = 0.25;
};

struct ComfortParams {
  double a_lon_max = 1.5;
  double a_lat_max = 1.2;
  double accel_rate = 1.0;      // cruise acceleration ramp
  double decel_rate = 1.2;      // cruise deceleration ramp
  double emergency_decel = 1.45;
  double stop_margin = 3.0;     // distance kept to the first blocked slice
};

struct TrackerParams {
  double wheelbase = 2.8;
  double lookahead_gain = 0.5;  // seconds of travel
  double min_lookahead = 2.0;
  double max_steer = 0.6;
};

struct SimParams {
  double tick = 0.1;
  double replan_period = 0.5;
  double target_radius = 3.0;
  int workers = 1;
};

struct Params {
  PotentialParams potential;
  KineticParams kinetic;
  StaticFieldParams static_field;
  GridParams grid;
  StackParams stack;
  PredictorParams predictor;
  PlannerParams planner;
  ComfortParams comfort;
  TrackerParams tracker;
  SimParams sim;
};

// Parses a JSON parameter file; unknown keys are rejected, missing keys keep
// their defaults. Throws ParseError / ValidationError.
Params LoadParams(const std::filesystem::path& file);
Params ParseParams(const std::string& json_text);
std::string SerializeParams(const Params& params);

}  // namespace riskplan

#include "riskplan/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "riskplan/errors.hpp"
#include "riskplan/field.hpp"

namespace riskplan {

namespace {

constexpr double kTickTol = 1e-9;

void CheckHorizon(double horizon, double dt) {
  const bool known = horizon == 2.0 || horizon == 3.5 || horizon == 6.0;
  if (!known) throw PredictionError("prediction horizon must be one of 2.0, 3.5, 6.0 s");
  const double steps = horizon / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9) {
    throw PredictionError("prediction horizon must be a multiple of the frame step");
  }
}

int StepCount(double horizon, double dt) { return static_cast<int>(std::round(horizon / dt)); }

}  // namespace

void HistoryBuffer::Push(double t, const Pose2& pose, double speed) {
  if (!frames_.empty()) {
    const double gap = t - frames_.back().t;
    if (std::abs(gap - tick_) > kTickTol) {
      throw PredictionError("history frames must arrive one tick apart");
    }
  }
  frames_.push_back({t, pose, speed});
  if (static_cast<int>(frames_.size()) > capacity_) frames_.pop_front();
}

PredictedTrajectory PredictKinematic(const HistoryBuffer& history, double horizon,
                                     const PredictorParams& pp, double dt) {
  CheckHorizon(horizon, dt);
  if (history.size() < 2) {
    throw PredictionError("insufficient history: kinematic propagation needs at least 2 frames");
  }
  const size_t window = std::min<size_t>(history.size(), pp.fit_window);
  const size_t first = history.size() - window;

  // Constant fit of speed, linear fit of unwrapped heading over the window.
  double speed_sum = 0.0;
  std::vector<double> t_rel(window), theta(window);
  double unwrapped = history[first].pose.heading;
  for (size_t k = 0; k < window; ++k) {
    const auto& f = history[first + k];
    speed_sum += f.speed;
    t_rel[k] = f.t - history[first].t;
    if (k > 0) unwrapped += NormalizeAngle(f.pose.heading - history[first + k - 1].pose.heading);
    theta[k] = unwrapped;
  }
  const double v = speed_sum / static_cast<double>(window);
  double t_mean = 0.0, th_mean = 0.0;
  for (size_t k = 0; k < window; ++k) {
    t_mean += t_rel[k];
    th_mean += theta[k];
  }
  t_mean /= static_cast<double>(window);
  th_mean /= static_cast<double>(window);
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < window; ++k) {
    num += (t_rel[k] - t_mean) * (theta[k] - th_mean);
    den += (t_rel[k] - t_mean) * (t_rel[k] - t_mean);
  }
  const double omega = den > 0.0 ? num / den : 0.0;

  const Pose2 start = history.back().pose;
  PredictedTrajectory out;
  out.dt = dt;
  out.horizon = horizon;
  const int n = StepCount(horizon, dt);
  out.states.reserve(n);
  const double h0 = start.heading;
  for (int j = 1; j <= n; ++j) {
    const double tau = j * dt;
    PredictedState st;
    st.speed = v;
    if (std::abs(omega) < pp.min_yaw_rate) {
      st.pose = Pose2::Make(start.position.x + v * std::cos(h0) * tau,
                            start.position.y + v * std::sin(h0) * tau, h0);
    } else {
      const double h = h0 + omega * tau;
      st.pose = Pose2::Make(start.position.x + v / omega * (std::sin(h) - std::sin(h0)),
                            start.position.y - v / omega * (std::cos(h) - std::cos(h0)), h);
    }
    out.states.push_back(st);
  }
  return out;
}

std::optional<PredictedTrajectory> PredictMapFollowing(const DynamicObject& obj,
                                                       const LaneGraph& lanes, double horizon,
                                                       double dt) {
  CheckHorizon(horizon, dt);
  const auto match = lanes.NearestLane(obj.pose.position);
  if (!match || match->projection.distance > lanes.lanes[match->lane].width) {
    return std::nullopt;
  }
  const double lateral = match->projection.lateral;
  PredictedTrajectory out;
  out.dt = dt;
  out.horizon = horizon;
  const int n = StepCount(horizon, dt);
  out.states.reserve(n);
  // Zero advance carries no direction-of-travel evidence; a stationary object
  // keeps its observed pose instead of snapping to the lane tangent.
  if (obj.speed < 1e-9) {
    for (int j = 1; j <= n; ++j) out.states.push_back({obj.pose, 0.0});
    return out;
  }
  for (int j = 1; j <= n; ++j) {
    const auto arc = lanes.Advance(match->lane, match->projection.s, obj.speed * j * dt);
    PredictedState st;
    st.pose = Pose2::Make(arc.position.x - std::sin(arc.tangent) * lateral,
                          arc.position.y + std::cos(arc.tangent) * lateral, arc.tangent);
    st.speed = obj.speed;
    out.states.push_back(st);
  }
  return out;
}

RiskFeatureVector ExtractRiskFeatures(const DynamicObject& obj,
                                      std::span<const DynamicObject> others,
                                      std::span<const StaticObject> statics, const Params& params) {
  RiskFeatureVector out;
  out.position = obj.pose.position;
  const double d = params.predictor.feature_spacing;
  const Vec2 u = UnitVector(obj.pose.heading);
  const Vec2 n = LeftNormal(obj.pose.heading);
  const PreparedScene scene(others, statics, obj.Velocity(), obj.id, params);
  int idx = 0;
  for (int row = 0; row < 3; ++row) {
    const double lon = (1 - row) * d;  // +d ahead, 0, -d behind
    for (int col = 0; col < 3; ++col) {
      const double lat = (1 - col) * d;  // +d left, 0, -d right
      const Vec2 p = obj.pose.position + u * lon + n * lat;
      out.energies[idx++] = scene.EnergyAt(p);
    }
  }
  return out;
}

PredictedTrajectory Predictor::Predict(const DynamicObject& obj, const HistoryBuffer& history,
                                       std::span<const RiskFeatureVector> features,
                                       const LaneGraph& lanes, double horizon) const {
  const bool on_lane = lanes.OnLane(obj.pose.position);
  if (learned_ && !on_lane && history.Full()) {
    return learned_->Predict(history, features, horizon);
  }
  if (on_lane) {
    auto traj = PredictMapFollowing(obj, lanes, horizon, params_->stack.dt);
    if (traj) return *std::move(traj);
  }
  return PredictKinematic(history, horizon, params_->predictor, params_->stack.dt);
}

}  // namespace riskplan

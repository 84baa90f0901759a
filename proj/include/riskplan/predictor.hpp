#pragma once

#include <array>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskplan/params.hpp"
#include "riskplan/scenario.hpp"

namespace riskplan {

// Rolling observation window for one object: uniformly spaced frames at the
// simulation tick, oldest dropped beyond capacity.
class HistoryBuffer {
 public:
  struct Frame {
    double t = 0.0;
    Pose2 pose;
    double speed = 0.0;
  };

  HistoryBuffer() = default;
  HistoryBuffer(std::string id, int capacity, double tick)
      : id_(std::move(id)), capacity_(capacity), tick_(tick) {}

  // Frames must arrive in time order, one tick apart.
  void Push(double t, const Pose2& pose, double speed);

  const std::string& id() const { return id_; }
  int capacity() const { return capacity_; }
  double tick() const { return tick_; }
  size_t size() const { return frames_.size(); }
  bool Full() const { return static_cast<int>(frames_.size()) == capacity_; }
  const Frame& operator[](size_t i) const { return frames_[i]; }
  const Frame& back() const { return frames_.back(); }

 private:
  std::string id_;
  int capacity_ = 30;
  double tick_ = 0.1;
  std::deque<Frame> frames_;
};

struct PredictedState {
  Pose2 pose;
  double speed = 0.0;
};

// States at dt, 2*dt, ... horizon after the prediction instant.
struct PredictedTrajectory {
  double dt = 0.5;
  double horizon = 3.5;
  std::vector<PredictedState> states;
};

// Sampled field energies on a 3x3 stencil in the object frame plus the
// object position. Row-major from front-left to rear-right: rows step from
// +spacing ahead to -spacing behind, columns from +spacing left to -spacing
// right.
struct RiskFeatureVector {
  std::array<double, 9> energies{};
  Vec2 position;
};

// Registration point for a trained trajectory model serving objects that are
// off the lane graph and have a full observation window.
class LearnedModel {
 public:
  virtual ~LearnedModel() = default;
  virtual PredictedTrajectory Predict(const HistoryBuffer& history,
                                      std::span<const RiskFeatureVector> features,
                                      double horizon) = 0;
};

// Constant-turn-rate propagation from speed and yaw rate fitted over the last
// <= fit_window frames; near-zero yaw rate degrades to a straight line.
// Throws PredictionError with fewer than 2 frames.
PredictedTrajectory PredictKinematic(const HistoryBuffer& history, double horizon,
                                     const PredictorParams& pp, double dt);

// Projects the object onto the nearest centerline and advances at the current
// speed along arc length (through successors), keeping the signed lateral
// offset. nullopt when no centerline lies within one lane width.
std::optional<PredictedTrajectory> PredictMapFollowing(const DynamicObject& obj,
                                                       const LaneGraph& lanes, double horizon,
                                                       double dt);

// Field energies around `obj` as seen by `obj`, excluding its own field.
RiskFeatureVector ExtractRiskFeatures(const DynamicObject& obj,
                                      std::span<const DynamicObject> others,
                                      std::span<const StaticObject> statics, const Params& params);

// Dispatch: a registered learned model serves off-lane objects with a full
// history; on-lane objects follow the map; everything else propagates
// kinematically. An insufficient-history error surfaces only when every
// applicable branch fails.
class Predictor {
 public:
  explicit Predictor(const Params& params) : params_(&params) {}

  void RegisterLearnedModel(std::shared_ptr<LearnedModel> model) { learned_ = std::move(model); }
  bool HasLearnedModel() const { return learned_ != nullptr; }

  PredictedTrajectory Predict(const DynamicObject& obj, const HistoryBuffer& history,
                              std::span<const RiskFeatureVector> features, const LaneGraph& lanes,
                              double horizon) const;

 private:
  const Params* params_;
  std::shared_ptr<LearnedModel> learned_;
};

}  // namespace riskplan

#include "riskplan/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "riskplan/errors.hpp"
#include "riskplan/field.hpp"
#include "riskplan/grid.hpp"
#include "riskplan/predictor.hpp"

namespace riskplan {

namespace {

// Braking onset threshold for the first-deceleration metric; softer commands
// are speed regulation, not a braking decision.
constexpr double kDecelOnset = -0.3;

using SteadyClock = std::chrono::steady_clock;

double MsSince(SteadyClock::time_point start) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - start).count();
}

struct LoopState {
  double speed_sum = 0.0;
  int ticks = 0;
};

// Completes `rec` with gap/risk data, folds it into the aggregates, and
// reports whether the ego footprint intersects any agent.
bool ObserveTick(RunMetrics* metrics, LoopState* loop, TickRecord rec,
                 const DynamicObject& ego_obj, std::span<const DynamicObject> agents,
                 const Scenario& scenario, const Params& params) {
  rec.risk_here = TotalEnergyAt(ego_obj.pose.position, agents, scenario.static_objects,
                                ego_obj.Velocity(), ego_obj.id, params);
  const ConvexPolygon ego_fp = ego_obj.WorldFootprint();
  bool hit = false;
  for (const DynamicObject& obj : agents) {
    const ConvexPolygon fp = obj.WorldFootprint();
    rec.min_gap = std::min(rec.min_gap, PolygonDistance(ego_fp, fp));
    hit = hit || PolygonsIntersect(ego_fp, fp);
  }
  metrics->min_gap = std::min(metrics->min_gap, rec.min_gap);
  metrics->max_abs_lon_accel = std::max(metrics->max_abs_lon_accel, std::abs(rec.accel));
  metrics->max_abs_lat_accel = std::max(metrics->max_abs_lat_accel, std::abs(rec.lat_accel));
  if (rec.accel < 0.0) metrics->peak_decel = std::max(metrics->peak_decel, -rec.accel);
  if (metrics->first_decel_time < 0.0 && rec.accel <= kDecelOnset) {
    metrics->first_decel_time = rec.t;
  }
  loop->speed_sum += rec.speed;
  loop->ticks += 1;
  metrics->ticks.push_back(rec);
  return hit;
}

nlohmann::json MetricsJson(const RunMetrics& m) {
  nlohmann::json j;
  j["collision"] = m.collision;
  j["collision_time"] = m.collision_time;
  j["reached_target"] = m.reached_target;
  j["completion_time"] = m.completion_time;
  if (std::isfinite(m.min_gap)) {
    j["min_gap"] = m.min_gap;
  } else {
    j["min_gap"] = nullptr;
  }
  j["max_abs_lon_accel"] = m.max_abs_lon_accel;
  j["max_abs_lat_accel"] = m.max_abs_lat_accel;
  j["peak_decel"] = m.peak_decel;
  j["first_decel_time"] = m.first_decel_time;
  j["avg_speed"] = m.avg_speed;
  j["tick_count"] = m.ticks.size();
  return j;
}

void WriteSeriesRow(std::ofstream& out, const TickRecord& rec) {
  out << rec.t << ',' << rec.pose.position.x << ',' << rec.pose.position.y << ','
      << rec.pose.heading << ',' << rec.speed << ',' << rec.accel << ',' << rec.lat_accel << ','
      << rec.steer << ',' << (std::isfinite(rec.min_gap) ? rec.min_gap : -1.0) << ','
      << rec.risk_here << ',' << rec.selected_path << ',' << rec.plan_speed << ','
      << (rec.emergency ? 1 : 0) << '\n';
}

}  // namespace

double PurePursuitSteer(const EgoState& state, const PlannedTrajectory& traj,
                        const TrackerParams& tp, const ComfortParams& cp) {
  if (traj.points.empty()) return 0.0;
  const double lookahead = std::max(tp.min_lookahead, tp.lookahead_gain * state.speed);
  size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < traj.points.size(); ++i) {
    const double d2 = (traj.points[i].pose.position - state.pose.position).SquaredNorm();
    if (d2 < best) {
      best = d2;
      nearest = i;
    }
  }
  size_t goal = traj.points.size() - 1;
  for (size_t i = nearest; i < traj.points.size(); ++i) {
    if ((traj.points[i].pose.position - state.pose.position).Norm() >= lookahead) {
      goal = i;
      break;
    }
  }
  const Vec2 to_goal = traj.points[goal].pose.position - state.pose.position;
  const double dist = to_goal.Norm();
  if (dist < 1e-6) return 0.0;
  const double alpha = NormalizeAngle(std::atan2(to_goal.y, to_goal.x) - state.pose.heading);
  double steer = std::atan2(2.0 * tp.wheelbase * std::sin(alpha), std::max(dist, tp.min_lookahead));
  steer = std::clamp(steer, -tp.max_steer, tp.max_steer);
  if (state.speed > 0.1) {
    // cap the kinematic lateral acceleration v^2 tan(steer) / wheelbase
    const double steer_cap = std::atan(cp.a_lat_max * tp.wheelbase / (state.speed * state.speed));
    steer = std::clamp(steer, -steer_cap, steer_cap);
  }
  return steer;
}

EgoState IntegrateBicycle(const EgoState& state, double steer, double accel, double dt,
                          const TrackerParams& tp) {
  EgoState next;
  next.steer = steer;
  next.pose.position = state.pose.position + UnitVector(state.pose.heading) * (state.speed * dt);
  next.pose.heading =
      NormalizeAngle(state.pose.heading + state.speed * std::tan(steer) / tp.wheelbase * dt);
  next.speed = std::max(0.0, state.speed + accel * dt);
  next.accel = (next.speed - state.speed) / dt;  // realized, not commanded
  return next;
}

RunMetrics RunScenario(const Scenario& scenario, const Params& params, const SimOptions& options) {
  const double tick = params.sim.tick;
  const int replan_every = static_cast<int>(std::lround(params.sim.replan_period / tick));
  const int steps = static_cast<int>(std::lround(scenario.duration / tick));
  const int workers = options.workers > 0 ? options.workers : params.sim.workers;

  RunMetrics metrics;
  LoopState loop;
  EgoState ego{scenario.ego.pose, scenario.ego.speed, 0.0, 0.0};

  std::map<std::string, HistoryBuffer> histories;
  for (const Agent& agent : scenario.agents) {
    histories.emplace(agent.object.id, HistoryBuffer(agent.object.id,
                                                     params.predictor.history_capacity, tick));
  }

  const bool write_files = !options.out_dir.empty();
  std::ofstream series, trajectories, plan_log, prediction_log;
  if (write_files) {
    std::filesystem::create_directories(options.out_dir);
    series.open(options.out_dir / "series.csv");
    series.precision(17);
    series << "t,x,y,heading,speed,accel,lat_accel,steer,min_gap,risk,selected_path,plan_speed,"
              "emergency\n";
    trajectories.open(options.out_dir / "trajectories.csv");
    trajectories.precision(17);
    trajectories << "t,id,x,y,heading,speed\n";
    plan_log.open(options.out_dir / "plans.txt");
    plan_log.precision(6);
    plan_log << std::fixed;
    prediction_log.open(options.out_dir / "predictions.txt");
    prediction_log.precision(6);
    prediction_log << std::fixed;
    if (options.dump_grids) std::filesystem::create_directories(options.out_dir / "grids");
  }

  const Predictor predictor(params);
  PlanResult plan;
  bool have_plan = false;
  double plan_time = 0.0;
  int cycle = 0;

  for (int k = 0; k <= steps; ++k) {
    const double t = k * tick;
    const std::vector<DynamicObject> agents = scenario.AgentStates(t);
    for (const DynamicObject& obj : agents) histories.at(obj.id).Push(t, obj.pose, obj.speed);

    DynamicObject ego_obj = scenario.ego;
    ego_obj.pose = ego.pose;
    ego_obj.speed = ego.speed;

    if (k % replan_every == 0) {
      try {
        CycleTiming timing;
        timing.t = t;
        auto mark = SteadyClock::now();
        std::map<std::string, PredictedTrajectory> preds;
        for (const DynamicObject& obj : agents) {
          preds.emplace(obj.id, predictor.Predict(obj, histories.at(obj.id), {}, scenario.map,
                                                  params.predictor.horizon));
        }
        timing.predict_ms = MsSince(mark);

        mark = SteadyClock::now();
        const GridSpec spec = GridSpec::AroundEgo(ego.pose, params.grid);
        const RiskStack stack = BuildRiskStack(agents, scenario.static_objects, ego_obj, preds,
                                               spec, params, workers);
        timing.stack_ms = MsSince(mark);

        mark = SteadyClock::now();
        const std::vector<CandidatePath> paths = SamplePaths(scenario.map, ego_obj, params);
        plan = Plan(stack, paths, ego_obj, scenario.speed_limit, params);
        timing.plan_ms = MsSince(mark);

        metrics.timings.push_back(timing);
        have_plan = true;
        plan_time = t;

        if (write_files) {
          for (const auto& [id, traj] : preds) {
            prediction_log << "t=" << t << " id=" << id << " horizon=" << traj.horizon
                           << " states:";
            for (const PredictedState& st : traj.states) {
              prediction_log << " (" << st.pose.position.x << ' ' << st.pose.position.y << ' '
                             << st.pose.heading << ' ' << st.speed << ')';
            }
            prediction_log << '\n';
          }
          plan_log << "t=" << t << " path=" << plan.selected_index
                   << " plan_speed=" << plan.plan_speed
                   << " emergency=" << (plan.emergency ? 1 : 0) << " control=";
          for (const Vec2& c : plan.path.control) plan_log << " (" << c.x << ' ' << c.y << ')';
          plan_log << '\n';
          for (const TrajectoryPoint& p : plan.trajectory.points) {
            plan_log << "  state t=" << t + p.t << " x=" << p.pose.position.x
                     << " y=" << p.pose.position.y << " heading=" << p.pose.heading
                     << " speed=" << p.speed << " accel=" << p.accel << '\n';
          }
          if (options.dump_grids) {
            char name[32];
            std::snprintf(name, sizeof(name), "grid_%04d.rskg", cycle);
            WriteGridBinary(stack.frames[0], options.out_dir / "grids" / name);
          }
        }
        ++cycle;
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << e.what() << " (planning cycle at t=" << t << " s)";
        throw Error(msg.str());
      }
    }

    TickRecord rec;
    rec.t = t;
    rec.pose = ego.pose;
    rec.speed = ego.speed;
    rec.accel = ego.accel;
    rec.steer = ego.steer;
    rec.lat_accel = ego.speed * ego.speed * std::tan(ego.steer) / params.tracker.wheelbase;
    rec.selected_path = have_plan ? plan.selected_index : -1;
    rec.plan_speed = have_plan ? plan.plan_speed : 0.0;
    rec.emergency = have_plan && plan.emergency;
    const bool hit = ObserveTick(&metrics, &loop, rec, ego_obj, agents, scenario, params);
    if (write_files) {
      WriteSeriesRow(series, metrics.ticks.back());
      trajectories << t << ",ego," << ego.pose.position.x << ',' << ego.pose.position.y << ','
                   << ego.pose.heading << ',' << ego.speed << '\n';
      for (const DynamicObject& obj : agents) {
        trajectories << t << ',' << obj.id << ',' << obj.pose.position.x << ','
                     << obj.pose.position.y << ',' << obj.pose.heading << ',' << obj.speed << '\n';
      }
    }

    if (hit) {
      metrics.collision = true;
      metrics.collision_time = t;
      metrics.completion_time = t;
      break;
    }
    if ((ego.pose.position - scenario.target.position).Norm() <= params.sim.target_radius) {
      metrics.reached_target = true;
      metrics.completion_time = t;
      break;
    }
    if (k == steps) {
      metrics.completion_time = t;
      break;
    }

    double steer = 0.0;
    double accel = 0.0;
    if (have_plan && !plan.trajectory.points.empty()) {
      steer = PurePursuitSteer(ego, plan.trajectory, params.tracker, params.comfort);
      const double v_cmd = plan.trajectory.StateAt(t - plan_time + tick).speed;
      accel = std::clamp((v_cmd - ego.speed) / tick, -params.comfort.a_lon_max,
                         params.comfort.a_lon_max);
    }
    ego = IntegrateBicycle(ego, steer, accel, tick, params.tracker);
  }

  metrics.avg_speed = loop.ticks > 0 ? loop.speed_sum / loop.ticks : 0.0;

  if (write_files) {
    std::ofstream(options.out_dir / "metrics.json") << MetricsJson(metrics).dump(2) << '\n';
    nlohmann::json tj;
    tj["cycles"] = nlohmann::json::array();
    std::vector<double> predict_ms, stack_ms, plan_ms;
    for (const CycleTiming& c : metrics.timings) {
      tj["cycles"].push_back({{"t", c.t},
                              {"predict_ms", c.predict_ms},
                              {"stack_ms", c.stack_ms},
                              {"plan_ms", c.plan_ms}});
      predict_ms.push_back(c.predict_ms);
      stack_ms.push_back(c.stack_ms);
      plan_ms.push_back(c.plan_ms);
    }
    tj["predict_ms_median"] = Percentile(predict_ms, 0.5);
    tj["stack_ms_median"] = Percentile(stack_ms, 0.5);
    tj["plan_ms_median"] = Percentile(plan_ms, 0.5);
    tj["stack_ms_p95"] = Percentile(stack_ms, 0.95);
    tj["plan_ms_p95"] = Percentile(plan_ms, 0.95);
    std::ofstream(options.out_dir / "timings.json") << tj.dump(2) << '\n';
    std::ofstream(options.out_dir / "report.txt") << FormatReport(metrics);
  }
  return metrics;
}

std::optional<double> LeadTimeToCollision(const DynamicObject& ego, const DynamicObject& agent,
                                          const LaneGraph& map) {
  const auto match = map.NearestLane(ego.pose.position);
  if (!match) return std::nullopt;
  const Lane& lane = map.lanes[match->lane];
  const Polyline::Projection agent_proj = lane.centerline.Project(agent.pose.position);
  if (agent_proj.distance > 0.5 * lane.width) return std::nullopt;
  const double arc_gap = agent_proj.s - match->projection.s;
  if (arc_gap <= 0.0) return std::nullopt;
  const double gap = arc_gap - ego.HalfLength() - agent.HalfLength();
  const double ego_along =
      ego.speed * std::cos(ego.pose.heading - lane.centerline.TangentAt(match->projection.s));
  const double agent_along =
      agent.speed * std::cos(agent.pose.heading - lane.centerline.TangentAt(agent_proj.s));
  const double closing = ego_along - agent_along;
  if (closing <= 1e-9) return std::nullopt;
  return std::max(0.0, gap) / closing;
}

RunMetrics RunTtcPolicy(const Scenario& scenario, const Params& params,
                        const TtcPolicyConfig& cfg) {
  const double tick = params.sim.tick;
  const int steps = static_cast<int>(std::lround(scenario.duration / tick));
  const auto start = scenario.map.NearestLane(scenario.ego.pose.position);
  if (!start) throw PlanningError("ttc policy: the map has no lanes");

  RunMetrics metrics;
  LoopState loop;
  double progress = 0.0;
  double v = scenario.ego.speed;
  double accel_realized = 0.0;

  for (int k = 0; k <= steps; ++k) {
    const double t = k * tick;
    const std::vector<DynamicObject> agents = scenario.AgentStates(t);
    const LaneGraph::ArcPoint at =
        scenario.map.Advance(start->lane, start->projection.s, progress);
    DynamicObject ego_obj = scenario.ego;
    ego_obj.pose = Pose2::Make(at.position.x, at.position.y, at.tangent);
    ego_obj.speed = v;

    TickRecord rec;
    rec.t = t;
    rec.pose = ego_obj.pose;
    rec.speed = v;
    rec.accel = accel_realized;
    const bool hit = ObserveTick(&metrics, &loop, rec, ego_obj, agents, scenario, params);

    if (hit) {
      metrics.collision = true;
      metrics.collision_time = t;
      metrics.completion_time = t;
      break;
    }
    if ((ego_obj.pose.position - scenario.target.position).Norm() <= params.sim.target_radius) {
      metrics.reached_target = true;
      metrics.completion_time = t;
      break;
    }
    if (k == steps) {
      metrics.completion_time = t;
      break;
    }

    bool braking = false;
    for (const DynamicObject& obj : agents) {
      const auto ttc = LeadTimeToCollision(ego_obj, obj, scenario.map);
      if (ttc && *ttc < cfg.threshold) {
        braking = true;
        break;
      }
    }
    double a_cmd = 0.0;
    if (braking) {
      a_cmd = -cfg.brake;
    } else if (v < scenario.speed_limit) {
      a_cmd = std::min(params.comfort.accel_rate, (scenario.speed_limit - v) / tick);
    }
    const double v_next = std::max(0.0, v + a_cmd * tick);
    accel_realized = (v_next - v) / tick;
    progress += v * tick;
    v = v_next;
  }

  metrics.avg_speed = loop.ticks > 0 ? loop.speed_sum / loop.ticks : 0.0;
  return metrics;
}

TtcComparison CompareTtc(const Scenario& scenario, const Params& params,
                         const SimOptions& options) {
  TtcComparison cmp;
  cmp.risk = RunScenario(scenario, params, options);
  cmp.ttc = RunTtcPolicy(scenario, params);
  return cmp;
}

std::string FormatReport(const RunMetrics& m) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "collision:          " << (m.collision ? "yes" : "no");
  if (m.collision) out << " (t = " << m.collision_time << " s)";
  out << '\n';
  out << "reached target:     " << (m.reached_target ? "yes" : "no") << '\n';
  out << "completion time:    " << m.completion_time << " s\n";
  out << "min gap:            ";
  if (std::isfinite(m.min_gap)) {
    out << m.min_gap << " m\n";
  } else {
    out << "n/a\n";
  }
  out << "max |a_lon|:        " << m.max_abs_lon_accel << " m/s^2\n";
  out << "max |a_lat|:        " << m.max_abs_lat_accel << " m/s^2\n";
  out << "peak deceleration:  " << m.peak_decel << " m/s^2\n";
  out << "first deceleration: ";
  if (m.first_decel_time >= 0.0) {
    out << m.first_decel_time << " s\n";
  } else {
    out << "never\n";
  }
  out << "average speed:      " << m.avg_speed << " m/s\n";
  out << "ticks:              " << m.ticks.size() << '\n';
  return out.str();
}

std::string FormatTimings(const RunMetrics& m) {
  std::vector<double> predict_ms, stack_ms, plan_ms;
  for (const CycleTiming& c : m.timings) {
    predict_ms.push_back(c.predict_ms);
    stack_ms.push_back(c.stack_ms);
    plan_ms.push_back(c.plan_ms);
  }
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "cycles:             " << m.timings.size() << '\n';
  out << "predict median:     " << Percentile(predict_ms, 0.5) << " ms\n";
  out << "stack median:       " << Percentile(stack_ms, 0.5) << " ms (p95 "
      << Percentile(stack_ms, 0.95) << " ms)\n";
  out << "plan median:        " << Percentile(plan_ms, 0.5) << " ms (p95 "
      << Percentile(plan_ms, 0.95) << " ms)\n";
  return out.str();
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size());
  const int idx = std::clamp(static_cast<int>(std::ceil(rank)) - 1, 0,
                             static_cast<int>(values.size()) - 1);
  return values[idx];
}

}  // namespace riskplan

#include "riskplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskplan/errors.hpp"

namespace riskplan {

namespace {

constexpr double kBlockedSpeed = 0.05;

Vec2 BezierPoint(const std::array<Vec2, 4>& p, double u) {
  const double w = 1.0 - u;
  return p[0] * (w * w * w) + p[1] * (3.0 * w * w * u) + p[2] * (3.0 * w * u * u) +
         p[3] * (u * u * u);
}

Vec2 BezierDeriv(const std::array<Vec2, 4>& p, double u) {
  const double w = 1.0 - u;
  return (p[1] - p[0]) * (3.0 * w * w) + (p[2] - p[1]) * (6.0 * w * u) +
         (p[3] - p[2]) * (3.0 * u * u);
}

Vec2 BezierSecond(const std::array<Vec2, 4>& p, double u) {
  return (p[2] - p[1] * 2.0 + p[0]) * (6.0 * (1.0 - u)) + (p[3] - p[2] * 2.0 + p[1]) * (6.0 * u);
}

void SampleBezier(CandidatePath* path, double spacing) {
  const std::array<Vec2, 4>& c = path->control;
  double length = 0.0;
  Vec2 prev = c[0];
  for (int i = 1; i <= 64; ++i) {
    const Vec2 p = BezierPoint(c, i / 64.0);
    length += (p - prev).Norm();
    prev = p;
  }
  const int n = std::max(2, static_cast<int>(std::ceil(length / spacing)));
  path->samples.clear();
  path->samples.reserve(n + 1);
  double s = 0.0;
  prev = c[0];
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const Vec2 p = BezierPoint(c, u);
    const Vec2 d = BezierDeriv(c, u);
    s += (p - prev).Norm();
    prev = p;
    PathSample sample;
    sample.s = s;
    sample.position = p;
    const double speed2 = d.SquaredNorm();
    if (speed2 > 1e-18) {
      sample.heading = std::atan2(d.y, d.x);
      sample.curvature = d.Cross(BezierSecond(c, u)) / (speed2 * std::sqrt(speed2));
    } else {
      sample.heading = path->samples.empty() ? 0.0 : path->samples.back().heading;
      sample.curvature = 0.0;
    }
    path->samples.push_back(sample);
  }
}

CandidatePath StraightAhead(const Pose2& pose, double length, int index, const Params& params) {
  const Vec2 u = UnitVector(pose.heading);
  CandidatePath path;
  path.index = index;
  path.endpoint_offset = 0.0;
  path.control = {pose.position, pose.position + u * (length / 3.0),
                  pose.position + u * (2.0 * length / 3.0), pose.position + u * length};
  SampleBezier(&path, params.planner.sample_spacing);
  return path;
}

}  // namespace

PathSample CandidatePath::At(double s) const {
  const PathSample& first = samples.front();
  if (s <= first.s) return first;
  const PathSample& last = samples.back();
  if (s >= last.s) {
    PathSample out = last;
    out.s = s;
    out.position = last.position + UnitVector(last.heading) * (s - last.s);
    out.curvature = 0.0;
    return out;
  }
  const auto it = std::lower_bound(samples.begin(), samples.end(), s,
                                   [](const PathSample& a, double v) { return a.s < v; });
  const PathSample& b = *it;
  const PathSample& a = *(it - 1);
  const double span = b.s - a.s;
  const double u = span > 0.0 ? (s - a.s) / span : 0.0;
  PathSample out;
  out.s = s;
  out.position = a.position + (b.position - a.position) * u;
  out.heading = NormalizeAngle(a.heading + NormalizeAngle(b.heading - a.heading) * u);
  out.curvature = a.curvature + (b.curvature - a.curvature) * u;
  return out;
}

std::vector<CandidatePath> SamplePaths(const LaneGraph& map, const DynamicObject& ego,
                                       const Params& params) {
  const auto match = map.NearestLane(ego.pose.position);
  if (!match) throw PlanningError("paths: the map has no lanes");
  const double lookahead = std::max(params.planner.min_lookahead,
                                    ego.speed * params.stack.frames * params.stack.dt);
  const LaneGraph::ArcPoint end = map.Advance(match->lane, match->projection.s, lookahead);

  // Drivable corridor: lateral lane intervals at the lookahead cross-section,
  // chained outward from the reference lane. Lanes that cross rather than run
  // with the corridor are ignored.
  struct Interval {
    double lo, hi;
  };
  Interval corridor{0.0, 0.0};
  bool have_ref = false;
  std::vector<Interval> neighbors;
  for (size_t li = 0; li < map.lanes.size(); ++li) {
    const Lane& lane = map.lanes[li];
    const Polyline::Projection proj = lane.centerline.Project(end.position);
    if (std::abs(NormalizeAngle(lane.centerline.TangentAt(proj.s) - end.tangent)) > M_PI / 4.0) {
      continue;
    }
    const double center = -proj.lateral;
    const Interval iv{center - 0.5 * lane.width, center + 0.5 * lane.width};
    if (static_cast<int>(li) == end.lane) {
      corridor = iv;
      have_ref = true;
    } else {
      neighbors.push_back(iv);
    }
  }
  if (!have_ref) {
    const double w = map.lanes[end.lane].width;
    corridor = {-0.5 * w, 0.5 * w};
  }
  std::vector<bool> used(neighbors.size(), false);
  for (bool grew = true; grew;) {
    grew = false;
    for (size_t i = 0; i < neighbors.size(); ++i) {
      if (used[i]) continue;
      if (neighbors[i].lo <= corridor.hi + 0.05 && neighbors[i].hi >= corridor.lo - 0.05) {
        corridor.lo = std::min(corridor.lo, neighbors[i].lo);
        corridor.hi = std::max(corridor.hi, neighbors[i].hi);
        used[i] = true;
        grew = true;
      }
    }
  }

  const int n = params.planner.n_paths;
  const double center = 0.5 * (corridor.lo + corridor.hi);
  const double span = std::max(0.0, 0.5 * (corridor.hi - corridor.lo) - 0.5 * ego.width);
  const Vec2 p0 = ego.pose.position;
  const Vec2 ego_dir = UnitVector(ego.pose.heading);
  const Vec2 end_dir = UnitVector(end.tangent);
  const Vec2 normal = LeftNormal(end.tangent);

  std::vector<CandidatePath> paths;
  paths.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double rel = n == 1 ? 0.0 : -span + 2.0 * span * k / (n - 1);
    CandidatePath path;
    path.index = k;
    path.endpoint_offset = rel;
    const Vec2 p3 = end.position + normal * (center + rel);
    const double chord = (p3 - p0).Norm();
    path.control = {p0, p0 + ego_dir * (chord / 3.0), p3 - end_dir * (chord / 3.0), p3};
    SampleBezier(&path, params.planner.sample_spacing);
    paths.push_back(std::move(path));
  }
  return paths;
}

int SliceIndex(double s, double speed, const Params& params) {
  const double ds = std::max(speed, params.planner.v_floor) * params.stack.dt;
  const int raw = static_cast<int>(std::floor(s / ds));
  return std::clamp(raw, 0, params.stack.frames - 1);
}

double MaxRiskAlong(const RiskGrid& grid, const CandidatePath& path, double s_begin, double s_end,
                    double radius, double e_max) {
  const GridSpec& spec = grid.spec;
  const double r2 = radius * radius;
  double worst = 0.0;
  for (const PathSample& sample : path.samples) {
    if (sample.s < s_begin || sample.s >= s_end) continue;
    if (!spec.ContainsPoint(sample.position)) {
      worst = std::max(worst, e_max);
      continue;
    }
    const Vec2& p = sample.position;
    const int i_lo = std::max(0, static_cast<int>(std::floor((p.x - radius - spec.origin.x) /
                                                             spec.resolution)));
    const int i_hi = std::min(spec.nx - 1, static_cast<int>(std::floor(
                                               (p.x + radius - spec.origin.x) / spec.resolution)));
    const int j_lo = std::max(0, static_cast<int>(std::floor((p.y - radius - spec.origin.y) /
                                                             spec.resolution)));
    const int j_hi = std::min(spec.ny - 1, static_cast<int>(std::floor(
                                               (p.y + radius - spec.origin.y) / spec.resolution)));
    for (int j = j_lo; j <= j_hi; ++j) {
      for (int i = i_lo; i <= i_hi; ++i) {
        if ((spec.CellCenter(i, j) - p).SquaredNorm() <= r2) {
          worst = std::max(worst, grid.At(i, j));
        }
      }
    }
  }
  return worst;
}

double SpeedFromRisk(double risk, double s_max, const PlannerParams& pp) {
  if (risk <= pp.r_free) return s_max;
  if (risk >= pp.r_stop) return 0.0;
  return s_max * (pp.r_stop - risk) / (pp.r_stop - pp.r_free);
}

TrajectoryPoint PlannedTrajectory::StateAt(double t) const {
  if (points.empty()) return {};
  if (t <= points.front().t) return points.front();
  if (t >= points.back().t) return points.back();
  const auto it = std::lower_bound(points.begin(), points.end(), t,
                                   [](const TrajectoryPoint& p, double v) { return p.t < v; });
  const TrajectoryPoint& b = *it;
  const TrajectoryPoint& a = *(it - 1);
  const double span = b.t - a.t;
  const double u = span > 0.0 ? (t - a.t) / span : 0.0;
  TrajectoryPoint out;
  out.t = t;
  out.pose.position = a.pose.position + (b.pose.position - a.pose.position) * u;
  out.pose.heading = NormalizeAngle(a.pose.heading + NormalizeAngle(b.pose.heading - a.pose.heading) * u);
  out.speed = a.speed + (b.speed - a.speed) * u;
  out.accel = a.accel;
  return out;
}

PlanResult Plan(const RiskStack& stack, std::span<const CandidatePath> paths,
                const DynamicObject& ego, double speed_limit, const Params& params) {
  if (paths.empty()) throw PlanningError("plan: no candidate paths");
  const int m = params.stack.frames;
  if (static_cast<int>(stack.frames.size()) != m) {
    throw PlanningError("plan: stack frame count mismatch");
  }
  const double ds = std::max(ego.speed, params.planner.v_floor) * params.stack.dt;
  const double radius = 0.5 * ego.width + stack.spec.resolution;
  const double e_max = params.potential.e_max;

  PlanResult result;
  result.evaluations.reserve(paths.size());
  const auto evaluate = [&](const CandidatePath& path) {
    PathEvaluation eval;
    eval.path_index = path.index;
    eval.slices.resize(m);
    eval.plan_speed = speed_limit;
    for (int j = 0; j < m; ++j) {
      const double lo = j * ds;
      const double hi = j == m - 1 ? std::numeric_limits<double>::infinity() : (j + 1) * ds;
      SliceEvaluation& sl = eval.slices[j];
      sl.max_risk = MaxRiskAlong(stack.frames[j], path, lo, hi, radius, e_max);
      sl.risk_speed = SpeedFromRisk(sl.max_risk, speed_limit, params.planner);
      double max_kappa = 0.0;
      for (const PathSample& ps : path.samples) {
        if (ps.s >= lo && ps.s < hi) max_kappa = std::max(max_kappa, std::abs(ps.curvature));
      }
      sl.curvature_speed = max_kappa > 1e-9 ? std::sqrt(params.comfort.a_lat_max / max_kappa)
                                            : std::numeric_limits<double>::infinity();
      sl.speed = std::min({sl.risk_speed, sl.curvature_speed, speed_limit});
      // A slice that only permits a crawl is impassable for planning purposes;
      // treating it as blocked engages the stop margin instead of letting the
      // speed profile asymptote to zero exactly at the risk location.
      if (sl.speed <= kBlockedSpeed && eval.first_blocked_slice < 0) eval.first_blocked_slice = j;
      eval.plan_speed = std::min(eval.plan_speed, sl.speed);
    }
    return eval;
  };
  for (const CandidatePath& path : paths) result.evaluations.push_back(evaluate(path));

  size_t best = 0;
  for (size_t i = 1; i < result.evaluations.size(); ++i) {
    const PathEvaluation& a = result.evaluations[i];
    const PathEvaluation& b = result.evaluations[best];
    const int a_block = a.first_blocked_slice < 0 ? m : a.first_blocked_slice;
    const int b_block = b.first_blocked_slice < 0 ? m : b.first_blocked_slice;
    if (a.plan_speed > b.plan_speed + 1e-9) {
      best = i;
    } else if (a.plan_speed > b.plan_speed - 1e-9) {
      if (a_block > b_block) {
        best = i;
      } else if (a_block == b_block &&
                 std::abs(paths[i].endpoint_offset) < std::abs(paths[best].endpoint_offset) - 1e-9) {
        best = i;
      }
    }
  }

  const CandidatePath* path = &paths[best];
  const PathEvaluation* ev = &result.evaluations[best];
  result.selected_index = path->index;
  result.plan_speed = ev->plan_speed;

  // Degradation rule: when every candidate is blocked, stop along the current
  // heading instead of steering toward any endpoint.
  CandidatePath straight;
  PathEvaluation straight_ev;
  bool degraded = false;
  if (ev->plan_speed <= kBlockedSpeed) {
    straight = StraightAhead(ego.pose, path->samples.back().s, path->index, params);
    straight_ev = evaluate(straight);
    result.emergency = true;
    degraded = true;
    path = &straight;
    ev = &straight_ev;
  }
  result.path = *path;

  // Position-indexed speed bound; a blocked slice pulls the stop arc forward
  // by the stop margin and everything beyond it is unreachable.
  double stop_arc = std::numeric_limits<double>::infinity();
  if (ev->first_blocked_slice >= 0) {
    stop_arc = std::max(0.0, ev->first_blocked_slice * ds - params.comfort.stop_margin);
  }
  // The fallback must actually stop: even if the straight line itself reads
  // clear, it ends no later than the end of the sampled segment.
  if (degraded) {
    stop_arc = std::min(stop_arc, std::max(0.0, path->samples.back().s - params.comfort.stop_margin));
  }
  const size_t ns = path->samples.size();
  std::vector<double> allow(ns);
  for (size_t i = 0; i < ns; ++i) {
    const double s = path->samples[i].s;
    allow[i] = s >= stop_arc
                   ? 0.0
                   : std::min(speed_limit, ev->slices[SliceIndex(s, ego.speed, params)].speed);
  }
  for (int i = static_cast<int>(ns) - 2; i >= 0; --i) {
    const double gap = path->samples[i + 1].s - path->samples[i].s;
    allow[i] = std::min(allow[i], std::sqrt(allow[i + 1] * allow[i + 1] +
                                            2.0 * params.comfort.decel_rate * gap));
  }

  double a_dn = params.comfort.decel_rate;
  if (std::isfinite(stop_arc) && ego.speed > 0.0) {
    const double needed = ego.speed * ego.speed / (2.0 * std::max(stop_arc, 0.01));
    if (needed > params.comfort.decel_rate + 1e-9) {
      result.emergency = true;
      a_dn = std::clamp(needed, params.comfort.decel_rate, params.comfort.emergency_decel);
    }
  }

  const auto allow_at = [&](double s) {
    if (s <= path->samples.front().s) return allow.front();
    if (s >= path->samples.back().s) return allow.back();
    const auto it = std::lower_bound(path->samples.begin(), path->samples.end(), s,
                                     [](const PathSample& a, double v) { return a.s < v; });
    const size_t hi = it - path->samples.begin();
    const double sa = path->samples[hi - 1].s;
    const double sb = path->samples[hi].s;
    const double u = sb > sa ? (s - sa) / (sb - sa) : 0.0;
    // the square of a braking profile is linear in arc length
    const double q = allow[hi - 1] * allow[hi - 1] * (1.0 - u) + allow[hi] * allow[hi] * u;
    return std::sqrt(std::max(0.0, q));
  };

  const double tick = params.sim.tick;
  const int steps = static_cast<int>(std::lround((m - 1) * stack.dt / tick));
  result.trajectory.emergency = result.emergency;
  result.trajectory.points.reserve(steps + 1);
  // The allowable profile is a ceiling, not a command: an emergency plan must
  // never speed up just because the braking envelope sits above current speed.
  const double a_up = result.emergency ? 0.0 : params.comfort.accel_rate;
  double s = 0.0;
  double v = ego.speed;
  for (int k = 0; k <= steps; ++k) {
    const PathSample ps = path->At(s);
    const double target = std::min(allow_at(s), speed_limit);
    const double accel = std::clamp((target - v) / tick, -a_dn, a_up);
    result.trajectory.points.push_back({k * tick, Pose2{ps.position, ps.heading}, v, accel});
    double v_next = std::max(0.0, v + accel * tick);
    if (v_next < 1e-3 && target < 1e-3) v_next = 0.0;
    s += 0.5 * (v + v_next) * tick;
    v = v_next;
  }
  return result;
}

}  // namespace riskplan

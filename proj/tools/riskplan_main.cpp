#include <chrono>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "riskplan/errors.hpp"
#include "riskplan/grid.hpp"
#include "riskplan/params.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/scenario_io.hpp"
#include "riskplan/simulator.hpp"

namespace {

using namespace riskplan;

Params LoadParamsOrDefault(const std::string& path) {
  if (path.empty()) return Params{};
  return LoadParams(path);
}

int RunCommand(const std::string& scenario_path, const std::string& params_path,
               const std::string& out_dir, bool dump_grids, int workers) {
  const Scenario scenario = LoadScenario(scenario_path);
  const Params params = LoadParamsOrDefault(params_path);
  SimOptions options;
  options.out_dir = out_dir;
  options.dump_grids = dump_grids;
  options.workers = workers;
  const RunMetrics metrics = RunScenario(scenario, params, options);
  std::cout << FormatReport(metrics) << '\n' << FormatTimings(metrics);
  if (!out_dir.empty()) std::cout << "\nartifacts written to " << out_dir << '\n';
  return metrics.collision ? 3 : 0;
}

int CompareTtcCommand(const std::string& scenario_path, const std::string& params_path,
                      int workers) {
  const Scenario scenario = LoadScenario(scenario_path);
  const Params params = LoadParamsOrDefault(params_path);
  SimOptions options;
  options.workers = workers;
  const TtcComparison cmp = CompareTtc(scenario, params, options);
  std::cout << "=== risk-field planner ===\n"
            << FormatReport(cmp.risk) << "\n=== ttc-threshold policy ===\n"
            << FormatReport(cmp.ttc);
  if (cmp.risk.first_decel_time >= 0.0 && cmp.ttc.first_decel_time >= 0.0) {
    std::printf("\nrisk planner decelerates %.2f s earlier\n",
                cmp.ttc.first_decel_time - cmp.risk.first_decel_time);
  }
  return cmp.risk.collision ? 3 : 0;
}

// Deterministic synthetic scene: a straight three-lane road with `objects`
// vehicles staggered across the lanes ahead of the ego.
struct BenchScene {
  LaneGraph map;
  DynamicObject ego;
  std::vector<DynamicObject> objects;
  std::vector<StaticObject> statics;
  std::map<std::string, PredictedTrajectory> predictions;
};

BenchScene MakeBenchScene(int object_count, const Params& params) {
  BenchScene scene;
  for (int l = 0; l < 3; ++l) {
    Lane lane;
    lane.id = "lane" + std::to_string(l);
    lane.width = 3.5;
    lane.centerline = Polyline({{-50.0, (l - 1) * 3.5}, {400.0, (l - 1) * 3.5}});
    scene.map.lanes.push_back(std::move(lane));
  }
  const ConvexPolygon car({{-2.3, -0.9}, {2.3, -0.9}, {2.3, 0.9}, {-2.3, 0.9}});
  scene.ego.id = "ego";
  scene.ego.mass = 1500.0;
  scene.ego.width = 1.8;
  scene.ego.footprint = car;
  scene.ego.pose = Pose2::Make(0.0, 0.0, 0.0);
  scene.ego.speed = 10.0;
  for (int i = 0; i < object_count; ++i) {
    DynamicObject obj;
    obj.id = "obj" + std::to_string(i);
    obj.mass = 1200.0 + 150.0 * (i % 5);
    obj.width = 1.8;
    obj.footprint = car;
    obj.pose = Pose2::Make(12.0 + 7.0 * i, ((i % 3) - 1) * 3.5, 0.0);
    obj.speed = 4.0 + (i % 4);
    PredictedTrajectory traj;
    traj.dt = params.stack.dt;
    traj.horizon = params.predictor.horizon;
    const int n = static_cast<int>(std::lround(traj.horizon / traj.dt));
    for (int j = 1; j <= n; ++j) {
      PredictedState st;
      st.pose = Pose2::Make(obj.pose.position.x + obj.speed * j * traj.dt, obj.pose.position.y,
                            0.0);
      st.speed = obj.speed;
      traj.states.push_back(st);
    }
    scene.predictions.emplace(obj.id, std::move(traj));
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

int BenchCommand(const std::string& grid_arg, int object_count, int workers, int iterations) {
  Params params;
  int nx = 240;
  int ny = 80;
  if (!grid_arg.empty()) {
    if (std::sscanf(grid_arg.c_str(), "%dx%d", &nx, &ny) != 2 || nx < 1 || ny < 1) {
      throw ValidationError("bench: --grid expects WxH, e.g. 240x80");
    }
  }
  const BenchScene scene = MakeBenchScene(object_count, params);
  GridSpec spec;
  spec.resolution = params.grid.resolution;
  spec.nx = nx;
  spec.ny = ny;
  spec.origin = {scene.ego.pose.position.x - params.grid.behind,
                 scene.ego.pose.position.y - 0.5 * ny * spec.resolution};

  using Clock = std::chrono::steady_clock;
  std::vector<double> stack_ms, plan_ms;
  RiskStack stack;
  for (int it = 0; it < iterations; ++it) {
    auto t0 = Clock::now();
    stack = BuildRiskStack(scene.objects, scene.statics, scene.ego, scene.predictions, spec,
                           params, workers);
    auto t1 = Clock::now();
    const std::vector<CandidatePath> paths = SamplePaths(scene.map, scene.ego, params);
    const PlanResult plan = Plan(stack, paths, scene.ego, 15.0, params);
    auto t2 = Clock::now();
    stack_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    plan_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
  }

  const RiskStack reference = BuildRiskStack(scene.objects, scene.statics, scene.ego,
                                             scene.predictions, spec, params, 1);
  bool identical = reference.frames.size() == stack.frames.size();
  for (size_t f = 0; identical && f < reference.frames.size(); ++f) {
    identical = reference.frames[f].energies == stack.frames[f].energies;
  }

  std::printf("grid %dx%d, %d objects, %d workers, %d iterations\n", nx, ny, object_count,
              workers, iterations);
  std::printf("stack build: median %.2f ms, p95 %.2f ms\n", Percentile(stack_ms, 0.5),
              Percentile(stack_ms, 0.95));
  std::printf("plan:        median %.2f ms, p95 %.2f ms\n", Percentile(plan_ms, 0.5),
              Percentile(plan_ms, 0.95));
  std::printf("1-vs-%d-worker outputs %s\n", workers, identical ? "identical" : "DIFFER");
  return identical ? 0 : 1;
}

int ValidateCommand(const std::string& scenario_path, const std::string& params_path) {
  const Scenario scenario = LoadScenario(scenario_path);
  if (!params_path.empty()) LoadParams(params_path);
  std::cout << scenario_path << ": ok (" << scenario.map.lanes.size() << " lanes, "
            << scenario.agents.size() << " agents, " << scenario.static_objects.size()
            << " static objects, duration " << scenario.duration << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-field motion planning: scenario simulator and tools"};
  app.require_subcommand(1);

  std::string scenario_path, params_path, out_dir, grid_arg;
  bool dump_grids = false;
  int workers = 0;
  int bench_objects = 10;
  int bench_workers = static_cast<int>(std::thread::hardware_concurrency());
  int bench_iters = 50;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario closed loop");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--params", params_path, "parameter file (defaults built in)");
  run->add_option("--out", out_dir, "directory for metrics/series/trajectory artifacts");
  run->add_flag("--dump-grids", dump_grids, "write the current risk grid at every replan");
  run->add_option("--workers", workers, "rasterizer worker threads (0 = configured value)");

  CLI::App* cmp = app.add_subcommand("compare-ttc",
                                     "run the risk planner and a TTC-threshold baseline");
  cmp->add_option("scenario", scenario_path, "scenario file")->required();
  cmp->add_option("--params", params_path, "parameter file (defaults built in)");
  cmp->add_option("--workers", workers, "rasterizer worker threads (0 = configured value)");

  CLI::App* bench = app.add_subcommand("bench", "time risk-stack builds and planning");
  bench->add_option("--grid", grid_arg, "grid size as WxH cells (default 240x80)");
  bench->add_option("--objects", bench_objects, "object count (default 10)");
  bench->add_option("--workers", bench_workers, "worker threads (default hardware)");
  bench->add_option("--iters", bench_iters, "iterations per measurement (default 50)");

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("scenario", scenario_path, "scenario file")->required();
  validate->add_option("--params", params_path, "parameter file to validate too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) {
      return RunCommand(scenario_path, params_path, out_dir, dump_grids, workers);
    }
    if (cmp->parsed()) {
      return CompareTtcCommand(scenario_path, params_path, workers);
    }
    if (bench->parsed()) {
      if (bench_workers < 1) bench_workers = 1;
      return BenchCommand(grid_arg, bench_objects, bench_workers, bench_iters);
    }
    if (validate->parsed()) {
      return ValidateCommand(scenario_path, params_path);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

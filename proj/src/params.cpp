#include "riskplan/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "riskplan/errors.hpp"

namespace riskplan {

using nlohmann::json;

namespace {

class SectionReader {
 public:
  SectionReader(const json& root, const std::string& name) : name_(name) {
    if (const auto it = root.find(name); it != root.end()) {
      if (!it->is_object()) throw ValidationError("params." + name + ": expected an object");
      section_ = &*it;
    }
  }

  void Read(const char* key, double* out) {
    if (!section_) return;
    if (const auto it = section_->find(key); it != section_->end()) {
      if (!it->is_number()) throw ValidationError("params." + name_ + "." + key + ": expected a number");
      *out = it->get<double>();
      seen_.push_back(key);
    }
  }

  void Read(const char* key, int* out) {
    if (!section_) return;
    if (const auto it = section_->find(key); it != section_->end()) {
      if (!it->is_number_integer()) {
        throw ValidationError("params." + name_ + "." + key + ": expected an integer");
      }
      *out = it->get<int>();
      seen_.push_back(key);
    }
  }

  void RejectUnknown() const {
    if (!section_) return;
    for (const auto& [key, value] : section_->items()) {
      bool known = false;
      for (const auto& s : seen_) known = known || s == key;
      if (!known) throw ValidationError("params." + name_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json* section_ = nullptr;
  std::string name_;
  std::vector<std::string> seen_;
};

void Check(bool ok, const char* message) {
  if (!ok) throw ValidationError(message);
}

void Validate(const Params& p) {
  Check(p.potential.k > 0 && p.potential.r_a > 0 && p.potential.k1 >= 1 && p.potential.e_max > 0,
        "params.potential: k, r_a > 0, k1 >= 1, e_max > 0 required");
  Check(p.potential.t_scale > 0 && p.potential.alpha > 0 && p.potential.beta >= 1 &&
            p.potential.gamma > 0 && p.potential.cutoff > 0,
        "params.potential: t_scale, alpha, gamma, cutoff > 0 and beta >= 1 required");
  Check(p.kinetic.horizon > 0 && p.kinetic.v_min >= 0,
        "params.kinetic: horizon > 0 and v_min >= 0 required");
  Check(p.static_field.kappa >= 1, "params.static_field.kappa: must be >= 1");
  Check(p.grid.ahead > 0 && p.grid.behind >= 0 && p.grid.half_width > 0 && p.grid.resolution > 0,
        "params.grid: extents and resolution must be positive");
  Check(p.stack.dt > 0 && p.stack.frames >= 1, "params.stack: dt > 0 and frames >= 1 required");
  const double h = p.predictor.horizon;
  Check(h == 2.0 || h == 3.5 || h == 6.0, "params.predictor.horizon: must be one of 2.0, 3.5, 6.0");
  Check(p.predictor.history_capacity >= 2 && p.predictor.history_tick > 0 &&
            p.predictor.fit_window >= 2 && p.predictor.min_yaw_rate > 0 &&
            p.predictor.feature_spacing > 0,
        "params.predictor: capacity/fit_window >= 2, tick/min_yaw_rate/feature_spacing > 0");
  Check((p.stack.frames - 1) * p.stack.dt <= h + 1e-12,
        "params.stack.frames: stack span exceeds the prediction horizon");
  Check(p.planner.n_paths >= 1 && p.planner.n_paths % 2 == 1,
        "params.planner.n_paths: must be odd and >= 1");
  Check(p.planner.r_free >= 0 && p.planner.r_stop > p.planner.r_free,
        "params.planner: requires 0 <= r_free < r_stop");
  Check(p.planner.v_floor > 0 && p.planner.min_lookahead > 0 && p.planner.sample_spacing > 0,
        "params.planner: v_floor, min_lookahead, sample_spacing must be positive");
  Check(p.comfort.a_lon_max > 0 && p.comfort.a_lat_max > 0 && p.comfort.accel_rate > 0 &&
            p.comfort.decel_rate > 0 && p.comfort.emergency_decel > 0 &&
            p.comfort.accel_rate <= p.comfort.a_lon_max &&
            p.comfort.decel_rate <= p.comfort.a_lon_max &&
            p.comfort.emergency_decel <= p.comfort.a_lon_max,
        "params.comfort: ramp rates must be positive and within a_lon_max");
  Check(p.tracker.wheelbase > 0 && p.tracker.lookahead_gain >= 0 && p.tracker.min_lookahead > 0 &&
            p.tracker.max_steer > 0,
        "params.tracker: wheelbase, min_lookahead, max_steer must be positive");
  Check(p.sim.tick > 0 && p.sim.replan_period > 0 && p.sim.target_radius > 0 && p.sim.workers >= 0,
        "params.sim: tick, replan_period, target_radius must be positive");
  const double cycles = p.sim.replan_period / p.sim.tick;
  Check(std::abs(cycles - std::round(cycles)) < 1e-9,
        "params.sim.replan_period: must be a multiple of the tick");
}

}  // namespace

Params ParseParams(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("params: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("params: top level must be an object");
  for (const auto& [key, value] : root.items()) {
    static const char* kSections[] = {"potential", "kinetic",   "static_field", "grid",
                                      "stack",     "predictor", "planner",      "comfort",
                                      "tracker",   "sim"};
    bool known = false;
    for (const char* s : kSections) known = known || key == s;
    if (!known) throw ValidationError("params: unknown section '" + key + "'");
  }

  Params p;
  {
    SectionReader r(root, "potential");
    r.Read("k", &p.potential.k);
    r.Read("r_a", &p.potential.r_a);
    r.Read("k1", &p.potential.k1);
    r.Read("e_max", &p.potential.e_max);
    r.Read("t_scale", &p.potential.t_scale);
    r.Read("alpha", &p.potential.alpha);
    r.Read("beta", &p.potential.beta);
    r.Read("gamma", &p.potential.gamma);
    r.Read("cutoff", &p.potential.cutoff);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "kinetic");
    r.Read("horizon", &p.kinetic.horizon);
    r.Read("v_min", &p.kinetic.v_min);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "static_field");
    r.Read("kappa", &p.static_field.kappa);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "grid");
    r.Read("ahead", &p.grid.ahead);
    r.Read("behind", &p.grid.behind);
    r.Read("half_width", &p.grid.half_width);
    r.Read("resolution", &p.grid.resolution);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "stack");
    r.Read("dt", &p.stack.dt);
    r.Read("frames", &p.stack.frames);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "predictor");
    r.Read("history_capacity", &p.predictor.history_capacity);
    r.Read("history_tick", &p.predictor.history_tick);
    r.Read("horizon", &p.predictor.horizon);
    r.Read("fit_window", &p.predictor.fit_window);
    r.Read("min_yaw_rate", &p.predictor.min_yaw_rate);
    r.Read("feature_spacing", &p.predictor.feature_spacing);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "planner");
    r.Read("n_paths", &p.planner.n_paths);
    r.Read("r_free", &p.planner.r_free);
    r.Read("r_stop", &p.planner.r_stop);
    r.Read("v_floor", &p.planner.v_floor);
    r.Read("min_lookahead", &p.planner.min_lookahead);
    r.Read("sample_spacing", &p.planner.sample_spacing);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "comfort");
    r.Read("a_lon_max", &p.comfort.a_lon_max);
    r.Read("a_lat_max", &p.comfort.a_lat_max);
    r.Read("accel_rate", &p.comfort.accel_rate);
    r.Read("decel_rate", &p.comfort.decel_rate);
    r.Read("emergency_decel", &p.comfort.emergency_decel);
    r.Read("stop_margin", &p.comfort.stop_margin);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "tracker");
    r.Read("wheelbase", &p.tracker.wheelbase);
    r.Read("lookahead_gain", &p.tracker.lookahead_gain);
    r.Read("min_lookahead", &p.tracker.min_lookahead);
    r.Read("max_steer", &p.tracker.max_steer);
    r.RejectUnknown();
  }
  {
    SectionReader r(root, "sim");
    r.Read("tick", &p.sim.tick);
    r.Read("replan_period", &p.sim.replan_period);
    r.Read("target_radius", &p.sim.target_radius);
    r.Read("workers", &p.sim.workers);
    r.RejectUnknown();
  }
  Validate(p);
  return p;
}

Params LoadParams(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("params: cannot open file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseParams(buf.str());
}

std::string SerializeParams(const Params& p) {
  const json root{
      {"potential",
       {{"k", p.potential.k},
        {"r_a", p.potential.r_a},
        {"k1", p.potential.k1},
        {"e_max", p.potential.e_max},
        {"t_scale", p.potential.t_scale},
        {"alpha", p.potential.alpha},
        {"beta", p.potential.beta},
        {"gamma", p.potential.gamma},
        {"cutoff", p.potential.cutoff}}},
      {"kinetic", {{"horizon", p.kinetic.horizon}, {"v_min", p.kinetic.v_min}}},
      {"static_field", {{"kappa", p.static_field.kappa}}},
      {"grid",
       {{"ahead", p.grid.ahead},
        {"behind", p.grid.behind},
        {"half_width", p.grid.half_width},
        {"resolution", p.grid.resolution}}},
      {"stack", {{"dt", p.stack.dt}, {"frames", p.stack.frames}}},
      {"predictor",
       {{"history_capacity", p.predictor.history_capacity},
        {"history_tick", p.predictor.history_tick},
        {"horizon", p.predictor.horizon},
        {"fit_window", p.predictor.fit_window},
        {"min_yaw_rate", p.predictor.min_yaw_rate},
        {"feature_spacing", p.predictor.feature_spacing}}},
      {"planner",
       {{"n_paths", p.planner.n_paths},
        {"r_free", p.planner.r_free},
        {"r_stop", p.planner.r_stop},
        {"v_floor", p.planner.v_floor},
        {"min_lookahead", p.planner.min_lookahead},
        {"sample_spacing", p.planner.sample_spacing}}},
      {"comfort",
       {{"a_lon_max", p.comfort.a_lon_max},
        {"a_lat_max", p.comfort.a_lat_max},
        {"accel_rate", p.comfort.accel_rate},
        {"decel_rate", p.comfort.decel_rate},
        {"emergency_decel", p.comfort.emergency_decel},
        {"stop_margin", p.comfort.stop_margin}}},
      {"tracker",
       {{"wheelbase", p.tracker.wheelbase},
        {"lookahead_gain", p.tracker.lookahead_gain},
        {"min_lookahead", p.tracker.min_lookahead},
        {"max_steer", p.tracker.max_steer}}},
      {"sim",
       {{"tick", p.sim.tick},
        {"replan_period", p.sim.replan_period},
        {"target_radius", p.sim.target_radius},
        {"workers", p.sim.workers}}}};
  return root.dump(2) + "\n";
}

}  // namespace riskplan

#include "riskplan/scenario_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "riskplan/errors.hpp"

namespace riskplan {

using nlohmann::json;

namespace {

const json& Require(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(where + ": missing required field '" + key + "'");
  }
  return *it;
}

double RequireNumber(const json& obj, const std::string& key, const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_number()) {
    throw ValidationError(where + "." + key + ": expected a number");
  }
  return v.get<double>();
}

std::string RequireString(const json& obj, const std::string& key, const std::string& where) {
  const json& v = Require(obj, key, where);
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw ValidationError(where + "." + key + ": expected a non-empty string");
  }
  return v.get<std::string>();
}

Vec2 ParseVec2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(where + ": expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Pose2 ParsePose(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) {
    throw ValidationError(where + ": expected [x, y, heading]");
  }
  for (const auto& e : v) {
    if (!e.is_number()) throw ValidationError(where + ": expected [x, y, heading]");
  }
  return Pose2::Make(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

std::vector<Vec2> ParsePointList(const json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of points");
  std::vector<Vec2> pts;
  pts.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    pts.push_back(ParseVec2(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return pts;
}

ObjectKind ParseObjectKind(const std::string& s, const std::string& where) {
  if (s == "vehicle") return ObjectKind::kVehicle;
  if (s == "pedestrian") return ObjectKind::kPedestrian;
  if (s == "truck") return ObjectKind::kTruck;
  throw ValidationError(where + ".kind: unknown object kind '" + s + "'");
}

StaticKind ParseStaticKind(const std::string& s, const std::string& where) {
  if (s == "lane_line") return StaticKind::kLaneLine;
  if (s == "barrier") return StaticKind::kBarrier;
  throw ValidationError(where + ".kind: unknown static kind '" + s + "'");
}

DynamicObject ParseObject(const json& v, const std::string& where) {
  if (!v.is_object()) throw ValidationError(where + ": expected an object");
  DynamicObject obj;
  obj.id = RequireString(v, "id", where);
  obj.kind = ParseObjectKind(RequireString(v, "kind", where), where);
  obj.mass = RequireNumber(v, "mass", where);
  if (obj.mass <= 0.0) throw ValidationError(where + ".mass: must be > 0");
  obj.width = RequireNumber(v, "width", where);
  if (obj.width <= 0.0) throw ValidationError(where + ".width: must be > 0");
  try {
    obj.footprint = ConvexPolygon(ParsePointList(Require(v, "footprint", where), where + ".footprint"));
  } catch (const ValidationError& e) {
    throw ValidationError(where + "." + e.what());
  }
  if (!obj.footprint.Contains({0.0, 0.0})) {
    throw ValidationError(where + ".footprint: must contain the object-frame origin");
  }
  obj.pose = ParsePose(Require(v, "pose", where), where + ".pose");
  obj.speed = RequireNumber(v, "speed", where);
  if (obj.speed < 0.0) throw ValidationError(where + ".speed: must be >= 0");
  return obj;
}

json DumpVec2(const Vec2& v) { return json::array({v.x, v.y}); }
json DumpPose(const Pose2& p) { return json::array({p.position.x, p.position.y, p.heading}); }

json DumpObject(const DynamicObject& o) {
  json pts = json::array();
  for (const Vec2& v : o.footprint.vertices()) pts.push_back(DumpVec2(v));
  return json{{"id", o.id},
              {"kind", ToString(o.kind)},
              {"mass", o.mass},
              {"width", o.width},
              {"footprint", pts},
              {"pose", DumpPose(o.pose)},
              {"speed", o.speed}};
}

}  // namespace

Scenario ParseScenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("scenario: top level must be an object");

  Scenario sc;
  sc.speed_limit = RequireNumber(root, "speed_limit", "scenario");
  if (sc.speed_limit <= 0.0) throw ValidationError("scenario.speed_limit: must be > 0");
  sc.duration = RequireNumber(root, "duration", "scenario");
  if (sc.duration <= 0.0) throw ValidationError("scenario.duration: must be > 0");
  sc.target = ParsePose(Require(root, "target", "scenario"), "scenario.target");

  const json& map = Require(root, "map", "scenario");
  if (!map.is_object()) throw ValidationError("scenario.map: expected an object");
  const json& lanes = Require(map, "lanes", "scenario.map");
  if (!lanes.is_array() || lanes.empty()) {
    throw ValidationError("scenario.map.lanes: expected a non-empty array");
  }
  std::map<std::string, int> lane_index;
  for (size_t i = 0; i < lanes.size(); ++i) {
    const std::string where = "scenario.map.lanes[" + std::to_string(i) + "]";
    Lane lane;
    lane.id = RequireString(lanes[i], "id", where);
    if (lane_index.count(lane.id)) {
      throw ValidationError(where + ".id: duplicate lane id '" + lane.id + "'");
    }
    lane_index[lane.id] = static_cast<int>(i);
    lane.width = RequireNumber(lanes[i], "width", where);
    if (lane.width <= 0.0) throw ValidationError(where + ".width: must be > 0");
    try {
      lane.centerline = Polyline(ParsePointList(Require(lanes[i], "centerline", where), where + ".centerline"));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ".centerline: " + e.what());
    }
    sc.map.lanes.push_back(std::move(lane));
  }
  for (size_t i = 0; i < lanes.size(); ++i) {
    const std::string where = "scenario.map.lanes[" + std::to_string(i) + "]";
    if (!lanes[i].contains("successors")) continue;
    const json& succ = lanes[i]["successors"];
    if (!succ.is_array()) throw ValidationError(where + ".successors: expected an array");
    for (const auto& s : succ) {
      if (!s.is_string() || !lane_index.count(s.get<std::string>())) {
        throw ValidationError(where + ".successors: unknown lane id");
      }
      sc.map.lanes[i].successors.push_back(lane_index[s.get<std::string>()]);
    }
  }

  if (map.contains("static_objects")) {
    const json& stats = map["static_objects"];
    if (!stats.is_array()) throw ValidationError("scenario.map.static_objects: expected an array");
    for (size_t i = 0; i < stats.size(); ++i) {
      const std::string where = "scenario.map.static_objects[" + std::to_string(i) + "]";
      StaticObject so;
      so.id = RequireString(stats[i], "id", where);
      so.kind = ParseStaticKind(RequireString(stats[i], "kind", where), where);
      so.width = RequireNumber(stats[i], "width", where);
      if (so.width <= 0.0) throw ValidationError(where + ".width: must be > 0");
      so.stiffness = RequireNumber(stats[i], "stiffness", where);
      if (so.stiffness < 0.0) throw ValidationError(where + ".stiffness: must be >= 0");
      try {
        so.shape = Polyline(ParsePointList(Require(stats[i], "points", where), where + ".points"));
      } catch (const ValidationError& e) {
        throw ValidationError(where + ".points: " + e.what());
      }
      sc.static_objects.push_back(std::move(so));
    }
  }

  sc.ego = ParseObject(Require(root, "ego", "scenario"), "scenario.ego");

  if (root.contains("agents")) {
    const json& agents = root["agents"];
    if (!agents.is_array()) throw ValidationError("scenario.agents: expected an array");
    for (size_t i = 0; i < agents.size(); ++i) {
      const std::string where = "scenario.agents[" + std::to_string(i) + "]";
      Agent agent;
      agent.object = ParseObject(Require(agents[i], "object", where), where + ".object");
      const json& motion = Require(agents[i], "motion", where);
      if (!motion.is_array() || motion.size() < 2) {
        throw ValidationError(where + ".motion: expected at least 2 timed poses");
      }
      for (size_t k = 0; k < motion.size(); ++k) {
        const std::string kw = where + ".motion[" + std::to_string(k) + "]";
        AgentScript::Keyframe kf;
        kf.t = RequireNumber(motion[k], "t", kw);
        kf.pose = ParsePose(Require(motion[k], "pose", kw), kw + ".pose");
        if (!agent.script.keyframes.empty() && kf.t <= agent.script.keyframes.back().t) {
          throw ValidationError(kw + ".t: timestamps must be strictly increasing");
        }
        agent.script.keyframes.push_back(kf);
      }
      const double t0 = agent.script.keyframes.front().t;
      const double t1 = agent.script.keyframes.back().t;
      if (t0 > 0.0 || t1 < sc.duration) {
        std::ostringstream msg;
        msg << where << ".motion: covers [" << t0 << ", " << t1
            << "] but must cover [0, " << sc.duration << "]";
        throw ValidationError(msg.str());
      }
      agent.script.Resample(sc.duration, 0.1);
      sc.agents.push_back(std::move(agent));
    }
  }

  // Duplicate object ids would make prediction bookkeeping ambiguous.
  std::map<std::string, int> ids;
  ids[sc.ego.id] = 1;
  for (size_t i = 0; i < sc.agents.size(); ++i) {
    if (ids.count(sc.agents[i].object.id)) {
      throw ValidationError("scenario.agents[" + std::to_string(i) + "].object.id: duplicate id '" +
                            sc.agents[i].object.id + "'");
    }
    ids[sc.agents[i].object.id] = 1;
  }
  return sc;
}

Scenario LoadScenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("scenario: cannot open file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseScenario(buf.str());
}

std::string SerializeScenario(const Scenario& sc) {
  json lanes = json::array();
  for (const Lane& lane : sc.map.lanes) {
    json pts = json::array();
    for (const Vec2& v : lane.centerline.points()) pts.push_back(DumpVec2(v));
    json succ = json::array();
    for (int s : lane.successors) succ.push_back(sc.map.lanes[s].id);
    lanes.push_back({{"id", lane.id}, {"width", lane.width}, {"centerline", pts}, {"successors", succ}});
  }
  json stats = json::array();
  for (const StaticObject& so : sc.static_objects) {
    json pts = json::array();
    for (const Vec2& v : so.shape.points()) pts.push_back(DumpVec2(v));
    stats.push_back({{"id", so.id},
                     {"kind", ToString(so.kind)},
                     {"width", so.width},
                     {"stiffness", so.stiffness},
                     {"points", pts}});
  }
  json agents = json::array();
  for (const Agent& a : sc.agents) {
    json motion = json::array();
    for (const auto& kf : a.script.keyframes) {
      motion.push_back({{"t", kf.t}, {"pose", DumpPose(kf.pose)}});
    }
    agents.push_back({{"object", DumpObject(a.object)}, {"motion", motion}});
  }
  const json root{{"map", {{"lanes", lanes}, {"static_objects", stats}}},
                  {"ego", DumpObject(sc.ego)},
                  {"agents", agents},
                  {"target", DumpPose(sc.target)},
                  {"speed_limit", sc.speed_limit},
                  {"duration", sc.duration}};
  return root.dump(2) + "\n";
}

void SaveScenario(const Scenario& scenario, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("scenario: cannot write file " + file.string());
  out << SerializeScenario(scenario);
}

namespace {

bool PolylinesEqual(const Polyline& a, const Polyline& b) {
  return a.points() == b.points();
}

bool ObjectsEqual(const DynamicObject& a, const DynamicObject& b) {
  return a.id == b.id && a.kind == b.kind && a.mass == b.mass && a.width == b.width &&
         a.footprint.vertices() == b.footprint.vertices() && a.pose == b.pose && a.speed == b.speed;
}

}  // namespace

bool ScenariosEqual(const Scenario& a, const Scenario& b) {
  if (a.map.lanes.size() != b.map.lanes.size() ||
      a.static_objects.size() != b.static_objects.size() || a.agents.size() != b.agents.size()) {
    return false;
  }
  for (size_t i = 0; i < a.map.lanes.size(); ++i) {
    const Lane& la = a.map.lanes[i];
    const Lane& lb = b.map.lanes[i];
    if (la.id != lb.id || la.width != lb.width || la.successors != lb.successors ||
        !PolylinesEqual(la.centerline, lb.centerline)) {
      return false;
    }
  }
  for (size_t i = 0; i < a.static_objects.size(); ++i) {
    const StaticObject& sa = a.static_objects[i];
    const StaticObject& sb = b.static_objects[i];
    if (sa.id != sb.id || sa.kind != sb.kind || sa.width != sb.width ||
        sa.stiffness != sb.stiffness || !PolylinesEqual(sa.shape, sb.shape)) {
      return false;
    }
  }
  if (!ObjectsEqual(a.ego, b.ego)) return false;
  for (size_t i = 0; i < a.agents.size(); ++i) {
    if (!ObjectsEqual(a.agents[i].object, b.agents[i].object)) return false;
    const auto& ka = a.agents[i].script.keyframes;
    const auto& kb = b.agents[i].script.keyframes;
    if (ka.size() != kb.size()) return false;
    for (size_t k = 0; k < ka.size(); ++k) {
      if (ka[k].t != kb[k].t || !(ka[k].pose == kb[k].pose)) return false;
    }
  }
  return a.target == b.target && a.speed_limit == b.speed_limit && a.duration == b.duration;
}

}  // namespace riskplan

#include "tla/scenario.hpp"

#include "tla/xml.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tla {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ScenarioError(path + ": " + message);
}

// Wraps a JSON object, tracks which keys were read and rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<document>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(at(key), "required field missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(at(key), "expected a finite number");
    return d;
  }
  void number(const std::string& key, double& out) {
    used_.insert(key);
    if (has(key)) out = number(key);
  }
  void integer(const std::string& key, int& out) {
    used_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    out = v.get<int>();
  }
  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    used_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(at(key), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void boolean(const std::string& key, bool& out) {
    used_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    out = v.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  void string(const std::string& key, std::string& out) {
    used_.insert(key);
    if (has(key)) out = string(key);
  }
  const json* optional(const std::string& key) {
    used_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }
  const json& array(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) fail(at(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

ddi::IntegrityLevel level_of(Obj& o, const std::string& key) {
  const std::string token = o.string(key);
  try {
    return ddi::parse_integrity_level(token);
  } catch (const ddi::SchemaError&) {
    fail(o.at(key), "unknown integrity level '" + token + "'");
  }
}

Phase phase_of(Obj& o, const std::string& key) {
  const std::string token = o.string(key);
  if (token == "red") return Phase::red;
  if (token == "green") return Phase::green;
  fail(o.at(key), "expected \"red\" or \"green\"");
}

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void read_vehicle(const json& j, VehicleParams& v) {
  Obj o(j, "vehicle");
  o.number("mass", v.mass);
  o.number("rolling_coeff_c0", v.rolling_coeff_c0);
  o.number("linear_drag_c1", v.linear_drag_c1);
  o.number("aero_drag_c2", v.aero_drag_c2);
  o.number("max_traction_force", v.max_traction_force);
  o.number("max_brake_force", v.max_brake_force);
  o.number("max_regen_power", v.max_regen_power);
  o.number("drive_efficiency", v.drive_efficiency);
  o.number("regen_efficiency", v.regen_efficiency);
  o.number("aux_power", v.aux_power);
  o.finish();
}

void read_mpc(const json& j, MpcConfig& m) {
  Obj o(j, "mpc");
  o.number("dt", m.dt);
  o.integer("horizon", m.horizon);
  if (const json* g = o.optional("control_grid")) {
    if (!g->is_array()) fail("mpc.control_grid", "expected an array");
    m.control_grid.clear();
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (!(*g)[i].is_number()) fail(idx("mpc.control_grid", i), "expected a number");
      m.control_grid.push_back((*g)[i].get<double>());
    }
  }
  o.number("velocity_grid_resolution", m.velocity_grid_resolution);
  o.number("position_grid_resolution", m.position_grid_resolution);
  o.number("stop_margin", m.stop_margin);
  o.number("safety_gap", m.safety_gap);
  std::string objective = "lateness";
  o.string("objective", objective);
  if (objective == "lateness") m.objective = TravelTimeObjective::lateness;
  else if (objective == "terminal") m.objective = TravelTimeObjective::terminal;
  else fail("mpc.objective", "expected \"lateness\" or \"terminal\"");
  o.finish();
}

ContractRef read_contract(const json& j, const std::string& path,
                          const std::filesystem::path& base_dir) {
  Obj o(j, path);
  ContractRef ref;
  o.string("file", ref.file);
  const bool has_inline = o.optional("xml") != nullptr;
  if (has_inline) ref.xml = o.string("xml");
  o.finish();
  if (ref.file.empty() == !has_inline) fail(path, "give exactly one of \"file\" or \"xml\"");
  if (!ref.file.empty()) {
    std::ifstream in(base_dir / ref.file, std::ios::binary);
    if (!in) fail(path + ".file", "cannot read '" + ref.file + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    ref.xml = ss.str();
  }
  try {
    ddi::parse_ddi(ref.xml);
  } catch (const std::exception& e) {
    fail(path, std::string("invalid contract: ") + e.what());
  }
  return ref;
}

void read_capabilities(const json& j, ddi::CapabilitySet& caps) {
  Obj o(j, "ddi.capabilities");
  if (const json* a = o.optional("offered")) {
    if (!a->is_array()) fail("ddi.capabilities.offered", "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      Obj e((*a)[i], idx("ddi.capabilities.offered", i));
      ddi::OfferedConfiguration c;
      c.name = e.string("name");
      c.integrity_level = level_of(e, "level");
      e.finish();
      caps.offered.push_back(c);
    }
  }
  if (const json* a = o.optional("platform_reactions")) {
    if (!a->is_array()) fail("ddi.capabilities.platform_reactions", "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      Obj e((*a)[i], idx("ddi.capabilities.platform_reactions", i));
      ddi::PlatformReaction c;
      c.failure = e.string("failure");
      c.reaction = e.string("reaction");
      c.integrity_level = level_of(e, "level");
      c.max_error_percent = e.number("max_error_percent");
      e.finish();
      caps.platform_reactions.push_back(c);
    }
  }
  if (const json* a = o.optional("health_monitors")) {
    if (!a->is_array()) fail("ddi.capabilities.health_monitors", "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      Obj e((*a)[i], idx("ddi.capabilities.health_monitors", i));
      ddi::HealthMonitor c;
      c.application = e.string("application");
      c.resource = e.string("resource");
      c.detection_threshold_ms = e.number("detection_threshold_ms");
      c.integrity_level = level_of(e, "level");
      e.finish();
      caps.health_monitors.push_back(c);
    }
  }
  o.finish();
}

template <class F>
void rethrow_as(const std::string& path, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

}  // namespace

void Scenario::validate() const {
  if (schema_version != kScenarioSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(schema_version));
  }
  if (name.empty()) fail("name", "must not be empty");
  rethrow_as("vehicle", [&] { vehicle.validate(); });
  rethrow_as("route", [&] { route.validate(); });
  rethrow_as("sensors", [&] { sensors.validate(); });
  rethrow_as("mpc", [&] { mpc.validate(); });
  rethrow_as("weights", [&] { weights.validate(); });
  rethrow_as("ddi.capabilities", [&] { capabilities.validate(); });
  if (!(confidence.margin_max >= 0.0)) fail("confidence.margin_max", "must be >= 0");
  if (!(max_duration > 0.0)) fail("end.max_duration", "must be > 0");

  const double length = route.length();
  auto on_route = [&](double p, const std::string& path) {
    if (!(p >= 0.0 && p <= length)) {
      fail(path, "position " + std::to_string(p) + " outside the route [0, " +
                     std::to_string(length) + "]");
    }
  };
  if (end_position) on_route(*end_position, "end.position");
  on_route(initial_position, "initial.position");
  if (end_position && !(*end_position > initial_position)) {
    fail("end.position", "must lie ahead of the initial position");
  }
  if (!(initial_velocity >= 0.0)) fail("initial.velocity", "must be >= 0");
  for (std::size_t i = 0; i < signals.size(); ++i) {
    rethrow_as(idx("signals", i), [&] { signals[i].validate(); });
    on_route(signals[i].signal_position, idx("signals", i) + ".position");
  }
  for (std::size_t i = 0; i < pedestrians.size(); ++i) {
    rethrow_as(idx("pedestrians", i), [&] { pedestrians[i].validate(); });
    on_route(pedestrians[i].crossing_position, idx("pedestrians", i) + ".crossing_position");
  }
  if (preceding) {
    on_route(preceding->position, "preceding.position");
    if (!(preceding->velocity >= 0.0)) fail("preceding.velocity", "must be >= 0");
    for (std::size_t i = 0; i < preceding->segments.size(); ++i) {
      if (!(preceding->segments[i].duration >= 0.0)) {
        fail(idx("preceding.segments", i) + ".duration", "must be >= 0");
      }
    }
  }
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
    fail("v2x.drop_probability", "must lie in [0, 1]");
  }
  if (!(pedestrian_safety_margin >= 0.0)) fail("v2x.pedestrian_safety_margin", "must be >= 0");
  if (advised_speed && !(*advised_speed > 0.0)) fail("v2x.advised_speed", "must be > 0");
  if (!(advice_decel > 0.0)) fail("v2x.advice_decel", "must be > 0");
  if (!(departure_accel >= 0.0)) fail("prediction.departure_accel", "must be >= 0");
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("<document>: ") + e.what());
  }
  Scenario s;
  Obj o(root, "");

  const json& version = o.raw("schema_version");
  if (!version.is_number_integer()) fail("schema_version", "expected an integer");
  s.schema_version = version.get<int>();
  if (s.schema_version != kScenarioSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(s.schema_version));
  }
  const json& name = o.raw("name");
  if (!name.is_string()) fail("name", "expected a string");
  s.name = name.get<std::string>();

  {
    Obj e(o.raw("end"), "end");
    if (!e.has("position") && !e.has("max_duration")) {
      fail("end", "needs \"position\" or \"max_duration\"");
    }
    if (e.optional("position")) s.end_position = e.number("position");
    e.number("max_duration", s.max_duration);
    e.finish();
  }
  if (const json* v = o.optional("vehicle")) read_vehicle(*v, s.vehicle);
  {
    Obj e(o.raw("initial"), "initial");
    e.number("position", s.initial_position);
    s.initial_velocity = e.number("velocity");
    e.finish();
  }
  {
    const json& pieces = o.raw("route");
    if (!pieces.is_array()) fail("route", "expected an array");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      Obj e(pieces[i], idx("route", i));
      RoutePiece p;
      p.start = e.number("start");
      p.end = e.number("end");
      e.number("grade", p.grade);
      p.legal_limit = e.number("legal_limit");
      e.finish();
      s.route.pieces.push_back(p);
    }
  }
  if (const json* a = o.optional("signals")) {
    if (!a->is_array()) fail("signals", "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      Obj e((*a)[i], idx("signals", i));
      PhaseSchedule p;
      p.signal_position = e.number("position");
      p.initial_phase = phase_of(e, "initial_phase");
      if (const json* t = e.optional("switch_times")) {
        if (!t->is_array()) fail(e.at("switch_times"), "expected an array");
        for (std::size_t k = 0; k < t->size(); ++k) {
          if (!(*t)[k].is_number()) fail(idx(e.at("switch_times"), k), "expected a number");
          p.switch_times.push_back((*t)[k].get<double>());
        }
      }
      e.number("confidence", p.confidence);
      e.finish();
      s.signals.push_back(std::move(p));
    }
  }
  if (const json* a = o.optional("pedestrians")) {
    if (!a->is_array()) fail("pedestrians", "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      Obj e((*a)[i], idx("pedestrians", i));
      PedestrianEvent p;
      p.crossing_position = e.number("crossing_position");
      p.start_time = e.number("start_time");
      e.number("walking_speed", p.walking_speed);
      e.number("road_width", p.road_width);
      e.number("confidence", p.confidence);
      e.finish();
      s.pedestrians.push_back(p);
    }
  }
  if (const json* pv = o.optional("preceding")) {
    Obj e(*pv, "preceding");
    PrecedingSpec spec;
    spec.position = e.number("position");
    e.number("velocity", spec.velocity);
    if (const json* segs = e.optional("segments")) {
      if (!segs->is_array()) fail("preceding.segments", "expected an array");
      for (std::size_t i = 0; i < segs->size(); ++i) {
        Obj g((*segs)[i], idx("preceding.segments", i));
        ScriptSegment seg;
        seg.duration = g.number("duration");
        g.number("acceleration", seg.acceleration);
        g.finish();
        spec.segments.push_back(seg);
      }
    }
    e.finish();
    s.preceding = std::move(spec);
  }
  if (const json* j = o.optional("sensors")) {
    Obj e(*j, "sensors");
    e.number("camera_range", s.sensors.camera_range);
    e.number("v2v_range", s.sensors.v2v_range);
    e.finish();
  }
  if (const json* j = o.optional("mpc")) read_mpc(*j, s.mpc);
  if (const json* j = o.optional("weights")) {
    Obj e(*j, "weights");
    e.number("energy", s.weights.w_energy);
    e.number("comfort", s.weights.w_comfort);
    e.number("time", s.weights.w_time);
    e.finish();
  }
  if (const json* j = o.optional("confidence")) {
    Obj e(*j, "confidence");
    e.number("margin_max", s.confidence.margin_max);
    e.finish();
  }
  if (const json* j = o.optional("v2x")) {
    Obj e(*j, "v2x");
    e.boolean("cooperation", s.cooperation);
    e.number("drop_probability", s.drop_probability);
    e.unsigned_integer("seed", s.seed);
    e.number("pedestrian_safety_margin", s.pedestrian_safety_margin);
    if (e.optional("advised_speed")) s.advised_speed = e.number("advised_speed");
    e.number("advice_decel", s.advice_decel);
    e.finish();
  }
  if (const json* j = o.optional("prediction")) {
    Obj e(*j, "prediction");
    e.number("departure_accel", s.departure_accel);
    e.finish();
  }
  if (const json* j = o.optional("ddi")) {
    Obj e(*j, "ddi");
    std::string mode = "strict";
    e.string("mode", mode);
    if (mode == "strict") s.gate_mode = GateMode::strict;
    else if (mode == "permissive") s.gate_mode = GateMode::permissive;
    else fail("ddi.mode", "expected \"strict\" or \"permissive\"");
    if (const json* c = e.optional("capabilities")) read_capabilities(*c, s.capabilities);
    if (const json* c = e.optional("contracts")) {
      Obj k(*c, "ddi.contracts");
      if (const json* x = k.optional("spat")) s.spat_contract = read_contract(*x, "ddi.contracts.spat", base_dir);
      if (const json* x = k.optional("occupancy")) s.occupancy_contract = read_contract(*x, "ddi.contracts.occupancy", base_dir);
      if (const json* x = k.optional("advice")) s.advice_contract = read_contract(*x, "ddi.contracts.advice", base_dir);
      k.finish();
    }
    e.finish();
  }
  o.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string() + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string save_scenario(const Scenario& s) {
  ordered_json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  ordered_json end;
  if (s.end_position) end["position"] = *s.end_position;
  end["max_duration"] = s.max_duration;
  j["end"] = end;
  const VehicleParams& v = s.vehicle;
  j["vehicle"] = {{"mass", v.mass},
                  {"rolling_coeff_c0", v.rolling_coeff_c0},
                  {"linear_drag_c1", v.linear_drag_c1},
                  {"aero_drag_c2", v.aero_drag_c2},
                  {"max_traction_force", v.max_traction_force},
                  {"max_brake_force", v.max_brake_force},
                  {"max_regen_power", v.max_regen_power},
                  {"drive_efficiency", v.drive_efficiency},
                  {"regen_efficiency", v.regen_efficiency},
                  {"aux_power", v.aux_power}};
  j["initial"] = {{"position", s.initial_position}, {"velocity", s.initial_velocity}};
  j["route"] = ordered_json::array();
  for (const RoutePiece& p : s.route.pieces) {
    j["route"].push_back({{"start", p.start},
                          {"end", p.end},
                          {"grade", p.grade},
                          {"legal_limit", p.legal_limit}});
  }
  j["signals"] = ordered_json::array();
  for (const PhaseSchedule& p : s.signals) {
    j["signals"].push_back({{"position", p.signal_position},
                            {"initial_phase", p.initial_phase == Phase::red ? "red" : "green"},
                            {"switch_times", p.switch_times},
                            {"confidence", p.confidence}});
  }
  j["pedestrians"] = ordered_json::array();
  for (const PedestrianEvent& p : s.pedestrians) {
    j["pedestrians"].push_back({{"crossing_position", p.crossing_position},
                                {"start_time", p.start_time},
                                {"walking_speed", p.walking_speed},
                                {"road_width", p.road_width},
                                {"confidence", p.confidence}});
  }
  if (s.preceding) {
    ordered_json segs = ordered_json::array();
    for (const ScriptSegment& g : s.preceding->segments) {
      segs.push_back({{"duration", g.duration}, {"acceleration", g.acceleration}});
    }
    j["preceding"] = {{"position", s.preceding->position},
                      {"velocity", s.preceding->velocity},
                      {"segments", segs}};
  }
  j["sensors"] = {{"camera_range", s.sensors.camera_range},
                  {"v2v_range", s.sensors.v2v_range}};
  j["mpc"] = {{"dt", s.mpc.dt},
              {"horizon", s.mpc.horizon},
              {"control_grid", s.mpc.control_grid},
              {"velocity_grid_resolution", s.mpc.velocity_grid_resolution},
              {"position_grid_resolution", s.mpc.position_grid_resolution},
              {"stop_margin", s.mpc.stop_margin},
              {"safety_gap", s.mpc.safety_gap},
              {"objective",
               s.mpc.objective == TravelTimeObjective::lateness ? "lateness" : "terminal"}};
  j["weights"] = {{"energy", s.weights.w_energy},
                  {"comfort", s.weights.w_comfort},
                  {"time", s.weights.w_time}};
  j["confidence"] = {{"margin_max", s.confidence.margin_max}};
  ordered_json v2x = {{"cooperation", s.cooperation},
                      {"drop_probability", s.drop_probability},
                      {"seed", s.seed},
                      {"pedestrian_safety_margin", s.pedestrian_safety_margin}};
  if (s.advised_speed) v2x["advised_speed"] = *s.advised_speed;
  v2x["advice_decel"] = s.advice_decel;
  j["v2x"] = v2x;
  j["prediction"] = {{"departure_accel", s.departure_accel}};

  ordered_json caps;
  caps["offered"] = ordered_json::array();
  for (const auto& c : s.capabilities.offered) {
    caps["offered"].push_back({{"name", c.name}, {"level", ddi::to_string(c.integrity_level)}});
  }
  caps["platform_reactions"] = ordered_json::array();
  for (const auto& c : s.capabilities.platform_reactions) {
    caps["platform_reactions"].push_back({{"failure", c.failure},
                                          {"reaction", c.reaction},
                                          {"level", ddi::to_string(c.integrity_level)},
                                          {"max_error_percent", c.max_error_percent}});
  }
  caps["health_monitors"] = ordered_json::array();
  for (const auto& c : s.capabilities.health_monitors) {
    caps["health_monitors"].push_back({{"application", c.application},
                                       {"resource", c.resource},
                                       {"detection_threshold_ms", c.detection_threshold_ms},
                                       {"level", ddi::to_string(c.integrity_level)}});
  }
  ordered_json contracts = ordered_json::object();
  auto put = [&](const char* key, const std::optional<ContractRef>& ref) {
    if (!ref) return;
    if (!ref->file.empty()) contracts[key] = {{"file", ref->file}};
    else contracts[key] = {{"xml", ref->xml}};
  };
  put("spat", s.spat_contract);
  put("occupancy", s.occupancy_contract);
  put("advice", s.advice_contract);
  j["ddi"] = {{"mode", s.gate_mode == GateMode::strict ? "strict" : "permissive"},
              {"capabilities", caps},
              {"contracts", contracts}};
  return j.dump(2) + "\n";
}

WorldState initial_world(const Scenario& s) {
  WorldState w;
  w.vehicle = s.vehicle;
  w.ego.position = s.initial_position;
  w.ego.velocity = s.initial_velocity;
  w.signals = s.signals;
  w.pedestrians = s.pedestrians;
  w.route = s.route;
  if (s.preceding) {
    w.preceding = ScriptedVehicle::from_segments(s.preceding->position, s.preceding->velocity,
                                                 s.preceding->segments, s.mpc.dt);
  }
  auto contract = [](const std::optional<ContractRef>& ref)
      -> std::shared_ptr<const ddi::DdiContract> {
    if (!ref) return nullptr;
    return std::make_shared<const ddi::DdiContract>(ddi::parse_ddi(ref->xml));
  };
  w.v2x.cooperation = s.cooperation;
  w.v2x.spat_contract = contract(s.spat_contract);
  w.v2x.occupancy_contract = contract(s.occupancy_contract);
  w.v2x.advice_contract = contract(s.advice_contract);
  w.v2x.advised_speed = s.advised_speed;
  w.v2x.drop_probability = s.drop_probability;
  w.v2x.seed = s.seed;
  w.v2x.pedestrian_safety_margin = s.pedestrian_safety_margin;
  return w;
}

}  // namespace tla

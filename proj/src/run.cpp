#include "tla/run.hpp"

#include "tla/controller.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace tla {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000" so that tiny negative rounding noise does not show.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

ordered_json payload_json(const V2xMessage& m) {
  switch (m.kind) {
    case MessageKind::spat: {
      const auto& s = std::get<PhaseSchedule>(m.payload);
      return {{"signal_position", s.signal_position},
              {"initial_phase", s.initial_phase == Phase::red ? "red" : "green"},
              {"switch_times", s.switch_times},
              {"confidence", s.confidence}};
    }
    case MessageKind::pedestrian_occupancy: {
      const auto& o = std::get<OccupancyPayload>(m.payload);
      return {{"crossing_position", o.crossing_position},
              {"estimated_clear_time", o.estimated_clear_time},
              {"confidence", o.confidence}};
    }
    case MessageKind::speed_advice:
      return {{"advised_speed", std::get<double>(m.payload)}};
  }
  return {};
}

std::string message_line(const V2xMessage& m, const GateDecision& g) {
  ordered_json j;
  j["timestamp"] = m.timestamp;
  j["kind"] = to_string(m.kind);
  j["sender"] = m.sender;
  j["sender_position"] = m.sender_position;
  j["sender_velocity"] = m.sender_velocity;
  j["payload"] = payload_json(m);
  j["contract"] = m.ddi ? json(m.ddi->component_name) : json(nullptr);
  j["security_property"] = m.ddi ? json(m.ddi->guarantee.security_property) : json(nullptr);
  j["decision"] = g.pass ? "pass" : "drop";
  if (!g.pass) {
    j["reason"] = g.reason;
    ordered_json unmet = ordered_json::array();
    for (const auto& d : g.unmet) {
      unmet.push_back({{"kind", ddi::to_string(d.kind)},
                       {"name", d.name},
                       {"level", ddi::to_string(d.integrity_level)}});
    }
    j["unmet"] = unmet;
  }
  return j.dump();
}

// The bound that actually held for this step: stop lines already behind the
// vehicle no longer apply.
double active_bound(const ConstraintProfile& c, double p_prev) {
  if (c.sources.empty()) return c.upper_position_bound.front();
  double b = kInf;
  for (const BoundSource& s : c.sources) {
    const double v = s.bound.front();
    if (!s.passable || p_prev <= v) b = std::min(b, v);
  }
  return b;
}

ControllerSettings controller_settings(const Scenario& s) {
  ControllerSettings c;
  c.mpc = s.mpc;
  c.weights = s.weights;
  c.vehicle = s.vehicle;
  c.confidence = s.confidence;
  c.route = s.route;
  c.advice_decel = s.advice_decel;
  c.departure_accel = s.departure_accel;
  return c;
}

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  const double dt = scenario.mpc.dt;
  WorldState world = initial_world(scenario);
  Controller controller(controller_settings(scenario));

  RunResult out;
  RunSummary& sum = out.summary;
  sum.scenario = scenario.name;
  sum.end_position = scenario.end_position;
  sum.route = scenario.route;

  LogRow first;
  first.time = world.time;
  first.position = world.ego.position;
  first.velocity = world.ego.velocity;
  first.reference_position = world.ego.position;
  out.rows.push_back(first);
  if (options.verbose) {
    out.replans.push_back(
        "time,feasible,emergency,total_cost,energy_cost,comfort_cost,time_cost,expanded,pruned,"
        "warm_start,sources,conflicts,advised_speed");
  }

  const long max_steps = std::lround(scenario.max_duration / dt);
  while (true) {
    if (scenario.end_position && world.ego.position >= *scenario.end_position) {
      sum.reached_end = true;
      break;
    }
    if (world.step >= max_steps) break;

    std::vector<V2xMessage> accepted;
    int dropped = 0;
    for (V2xMessage& m : broadcast(world, scenario.sensors)) {
      m.validate();
      const GateDecision g = gate_message(m, scenario.capabilities, scenario.gate_mode);
      if (options.verbose) out.messages.push_back(message_line(m, g));
      if (g.pass) accepted.push_back(std::move(m));
      else ++dropped;
    }
    const Observation obs = observe(world, scenario.sensors, accepted);
    const ControlDecision d = controller.step(obs);

    ++sum.replans;
    if (!d.solution.feasible) ++sum.infeasible_replans;
    sum.accepted_messages += static_cast<int>(accepted.size());
    sum.dropped_messages += dropped;
    sum.conflicts += obs.conflicts;

    if (options.verbose) {
      std::string line = fmt(world.time) + "," + (d.solution.feasible ? "1" : "0") + "," +
                         (d.solution.emergency ? "1" : "0") + "," + fmt(d.solution.total_cost) +
                         "," + fmt(d.solution.cost_breakdown.energy) + "," +
                         fmt(d.solution.cost_breakdown.comfort) + "," +
                         fmt(d.solution.cost_breakdown.time) + "," +
                         std::to_string(d.stats.expanded) + "," + std::to_string(d.stats.pruned) +
                         "," + (d.stats.used_warm_start ? "1" : "0") + "," +
                         std::to_string(d.constraints.sources.size()) + "," +
                         std::to_string(obs.conflicts) + "," +
                         (obs.advised_speed ? fmt(*obs.advised_speed) : "");
      out.replans.push_back(std::move(line));
    }

    const double bound = active_bound(d.constraints, world.ego.position);
    WorldState next = step_world(world, d.acceleration, dt);

    if (next.ego.position > bound) {
      ++sum.constraint_violations;
      if (options.abort_on_violation) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "constraint violation at t=%.3f s: position %.6f m exceeds bound %.6f m "
                      "(feasible=%d)",
                      next.time, next.ego.position, bound, d.solution.feasible ? 1 : 0);
        throw ConstraintViolation(buf);
      }
    }

    LogRow row;
    row.time = next.time;
    row.position = next.ego.position;
    row.velocity = next.ego.velocity;
    row.acceleration = next.last_ego_step.applied_acceleration;
    row.battery_power = next.last_ego_step.battery_power;
    row.energy = next.ego.battery_energy_used;
    row.position_bound = bound;
    row.reference_position = d.reference.positions.front();
    row.feasible = d.solution.feasible;
    row.accepted = static_cast<int>(accepted.size());
    row.dropped = dropped;
    out.rows.push_back(row);
    world = std::move(next);
  }

  sum.total_energy = world.ego.battery_energy_used;
  sum.travel_time = world.time;
  sum.final_position = world.ego.position;
  sum.min_velocity = out.rows.front().velocity;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    sum.min_velocity = std::min(sum.min_velocity, out.rows[i].velocity);
    if (i > 0 && out.rows[i].velocity == 0.0 && out.rows[i - 1].velocity > 0.0) ++sum.stop_count;
  }
  return out;
}

std::string format_csv(const std::vector<LogRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const LogRow& r : rows) {
    out += fmt(r.time) + ',' + fmt(r.position) + ',' + fmt(r.velocity) + ',' +
           fmt(r.acceleration) + ',' + fmt(r.battery_power) + ',' + fmt(r.energy) + ',' +
           fmt(r.position_bound) + ',' + fmt(r.reference_position) + ',' +
           (r.feasible ? '1' : '0') + ',' + std::to_string(r.accepted) + ',' +
           std::to_string(r.dropped) + '\n';
  }
  return out;
}

std::vector<LogRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("log: missing or unexpected CSV header");
  }
  std::vector<LogRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 11) {
      throw std::invalid_argument("log line " + std::to_string(line_no) + ": expected 11 fields");
    }
    auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(f[i].c_str(), &end);
      if (end == f[i].c_str() || *end != '\0') {
        throw std::invalid_argument("log line " + std::to_string(line_no) + ": bad number '" +
                                    f[i] + "'");
      }
      return v;
    };
    LogRow r;
    r.time = num(0);
    r.position = num(1);
    r.velocity = num(2);
    r.acceleration = num(3);
    r.battery_power = num(4);
    r.energy = num(5);
    r.position_bound = num(6);
    r.reference_position = num(7);
    r.feasible = num(8) != 0.0;
    r.accepted = static_cast<int>(num(9));
    r.dropped = static_cast<int>(num(10));
    rows.push_back(r);
  }
  return rows;
}

std::string summary_to_json(const RunSummary& s, const Scenario* scenario) {
  ordered_json j;
  j["scenario"] = s.scenario;
  j["total_energy"] = s.total_energy;
  j["min_velocity"] = s.min_velocity;
  j["stop_count"] = s.stop_count;
  j["travel_time"] = s.travel_time;
  j["constraint_violations"] = s.constraint_violations;
  j["infeasible_replans"] = s.infeasible_replans;
  j["replans"] = s.replans;
  j["accepted_messages"] = s.accepted_messages;
  j["dropped_messages"] = s.dropped_messages;
  j["conflicts"] = s.conflicts;
  j["reached_end"] = s.reached_end;
  j["final_position"] = s.final_position;
  j["end_position"] = s.end_position ? json(*s.end_position) : json(nullptr);
  ordered_json route = ordered_json::array();
  for (const RoutePiece& p : s.route.pieces) {
    route.push_back({{"start", p.start},
                     {"end", p.end},
                     {"grade", p.grade},
                     {"legal_limit", p.legal_limit}});
  }
  j["route"] = route;
  if (scenario) j["settings"] = ordered_json::parse(save_scenario(*scenario));
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("summary: ") + e.what());
  }
  try {
    RunSummary s;
    s.scenario = j.at("scenario").get<std::string>();
    s.total_energy = j.at("total_energy").get<double>();
    s.min_velocity = j.at("min_velocity").get<double>();
    s.stop_count = j.at("stop_count").get<int>();
    s.travel_time = j.at("travel_time").get<double>();
    s.constraint_violations = j.at("constraint_violations").get<int>();
    s.infeasible_replans = j.at("infeasible_replans").get<int>();
    s.replans = j.value("replans", 0);
    s.accepted_messages = j.value("accepted_messages", 0);
    s.dropped_messages = j.value("dropped_messages", 0);
    s.conflicts = j.value("conflicts", 0);
    s.reached_end = j.value("reached_end", false);
    s.final_position = j.value("final_position", 0.0);
    if (j.contains("end_position") && !j.at("end_position").is_null()) {
      s.end_position = j.at("end_position").get<double>();
    }
    for (const auto& p : j.at("route")) {
      s.route.pieces.push_back({p.at("start").get<double>(), p.at("end").get<double>(),
                                p.at("grade").get<double>(), p.at("legal_limit").get<double>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("summary: ") + e.what());
  }
}

Comparison compare(const RunSummary& a, const RunSummary& b) {
  if (!(a.route == b.route) || a.end_position != b.end_position) {
    throw std::invalid_argument("compare: runs cover different routes or end conditions");
  }
  if (!(a.total_energy != 0.0)) {
    throw std::invalid_argument("compare: baseline energy is zero");
  }
  Comparison c;
  c.energy_delta_percent = (a.total_energy - b.total_energy) / a.total_energy * 100.0;
  c.stop_delta = b.stop_count - a.stop_count;
  c.time_delta = b.travel_time - a.travel_time;
  return c;
}

std::string comparison_to_json(const Comparison& c, const RunSummary& a, const RunSummary& b) {
  ordered_json j;
  j["baseline"] = a.scenario;
  j["candidate"] = b.scenario;
  j["baseline_energy"] = a.total_energy;
  j["candidate_energy"] = b.total_energy;
  j["energy_delta_percent"] = c.energy_delta_percent;
  j["stop_delta"] = c.stop_delta;
  j["time_delta"] = c.time_delta;
  return j.dump(2) + "\n";
}

}  // namespace tla

#include "tla/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tla {

void Route::validate() const {
  if (pieces.empty()) throw std::invalid_argument("route: at least one piece required");
  double expected = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const RoutePiece& p = pieces[i];
    const std::string where = "route.pieces[" + std::to_string(i) + "]";
    if (p.start != expected) {
      throw std::invalid_argument(where + ".start: gap or overlap, expected " +
                                  std::to_string(expected));
    }
    if (!(p.end > p.start)) throw std::invalid_argument(where + ".end: must exceed start");
    if (!(p.legal_limit > 0.0) || !std::isfinite(p.legal_limit)) {
      throw std::invalid_argument(where + ".legal_limit: must be > 0");
    }
    if (!(std::abs(p.grade) < 0.5)) throw std::invalid_argument(where + ".grade: out of range");
    expected = p.end;
  }
}

double Route::length() const { return pieces.empty() ? 0.0 : pieces.back().end; }

const RoutePiece& Route::piece_at(double position) const {
  if (pieces.empty()) throw std::logic_error("route: empty");
  const auto it = std::upper_bound(pieces.begin(), pieces.end(), position,
                                   [](double p, const RoutePiece& r) { return p < r.end; });
  return it == pieces.end() ? pieces.back() : *it;
}

double Route::min_limit(double from, double to) const {
  double lo = piece_at(from).legal_limit;
  for (const RoutePiece& p : pieces) {
    if (p.end > from && p.start <= to) lo = std::min(lo, p.legal_limit);
  }
  return lo;
}

ScriptedVehicle ScriptedVehicle::from_segments(double initial_position,
                                               double initial_velocity,
                                               const std::vector<ScriptSegment>& segments,
                                               double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("preceding script: dt must be > 0");
  if (!(initial_velocity >= 0.0)) {
    throw std::invalid_argument("preceding script: initial velocity must be >= 0");
  }
  ScriptedVehicle s;
  s.dt = dt;
  s.positions.push_back(initial_position);
  s.velocities.push_back(initial_velocity);
  for (const ScriptSegment& seg : segments) {
    if (!(seg.duration >= 0.0)) {
      throw std::invalid_argument("preceding script: segment duration must be >= 0");
    }
    const long steps = std::lround(seg.duration / dt);
    for (long i = 0; i < steps; ++i) {
      const KinematicStep k = advance(s.positions.back(), s.velocities.back(), seg.acceleration, dt);
      s.positions.push_back(k.position);
      s.velocities.push_back(k.velocity);
    }
  }
  return s;
}

double ScriptedVehicle::position_at(long step) const {
  const auto i = static_cast<std::size_t>(std::clamp<long>(step, 0, long(positions.size()) - 1));
  return positions[i];
}

double ScriptedVehicle::velocity_at(long step) const {
  const auto i = static_cast<std::size_t>(std::clamp<long>(step, 0, long(velocities.size()) - 1));
  return velocities[i];
}

void SensorConfig::validate() const {
  if (!(camera_range > 0.0)) throw std::invalid_argument("sensors.camera_range: must be > 0");
  if (!(v2v_range > 0.0)) throw std::invalid_argument("sensors.v2v_range: must be > 0");
}

std::optional<double> WorldState::preceding_position() const {
  if (!preceding) return std::nullopt;
  return preceding->position_at(step);
}

std::optional<double> WorldState::preceding_velocity() const {
  if (!preceding) return std::nullopt;
  return preceding->velocity_at(step);
}

double WorldState::clear_time(const PedestrianEvent& event) const {
  return event.start_time + virtual_red_duration(event, v2x.pedestrian_safety_margin);
}

bool WorldState::pedestrian_present(const PedestrianEvent& event) const {
  return time < clear_time(event);
}

namespace {

constexpr double kSameSignal = 0.5;  // m

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic per (seed, step, index) so that replays drop the same messages.
bool dropped(const V2xSettings& v2x, long step, std::size_t index) {
  if (v2x.drop_probability <= 0.0) return false;
  const std::uint64_t h =
      splitmix64(v2x.seed ^ splitmix64(static_cast<std::uint64_t>(step) * 1315423911ull + index));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < v2x.drop_probability;
}

void merge_item(std::vector<ObservedSchedule>& items, ObservedSchedule item, double now) {
  for (ObservedSchedule& existing : items) {
    if (existing.pedestrian != item.pedestrian ||
        std::abs(existing.schedule.signal_position - item.schedule.signal_position) > kSameSignal) {
      continue;
    }
    ObservedSchedule* camera = existing.source == Source::camera ? &existing : nullptr;
    ObservedSchedule* remote = existing.source == Source::v2x ? &existing : nullptr;
    if (item.source == Source::camera) camera = &item;
    else remote = &item;
    if (!camera || !remote) {
      // Two reports from the same channel: keep the more confident one.
      if (item.schedule.confidence > existing.schedule.confidence) existing = std::move(item);
      return;
    }
    const double confidence = std::max(camera->schedule.confidence, remote->schedule.confidence);
    if (existing.pedestrian) {
      ObservedSchedule merged = *camera;
      merged.schedule.confidence = confidence;
      existing = std::move(merged);
    } else if (phase_at(camera->schedule, now) != phase_at(remote->schedule, now)) {
      ObservedSchedule merged = *camera;
      merged.conflict = true;
      existing = std::move(merged);
    } else {
      ObservedSchedule merged = *remote;
      merged.schedule.confidence = confidence;
      existing = std::move(merged);
    }
    return;
  }
  items.push_back(std::move(item));
}

}  // namespace

Observation observe(const WorldState& world, const SensorConfig& sensors,
                    const std::vector<V2xMessage>& accepted_messages) {
  Observation obs;
  obs.time = world.time;
  obs.ego = world.ego;
  const double ego = world.ego.position;

  for (const PhaseSchedule& s : world.signals) {
    if (std::abs(s.signal_position - ego) > sensors.camera_range) continue;
    ObservedSchedule item;
    item.schedule.signal_position = s.signal_position;
    item.schedule.initial_phase = phase_at(s, world.time);
    item.schedule.confidence = 1.0;
    merge_item(obs.schedules, std::move(item), world.time);
  }
  for (const PedestrianEvent& e : world.pedestrians) {
    if (std::abs(e.crossing_position - ego) > sensors.camera_range) continue;
    if (!world.pedestrian_present(e)) continue;
    ObservedSchedule item;
    item.pedestrian = true;
    PedestrianEvent seen = e;
    seen.confidence = 1.0;
    item.schedule = pedestrian_to_virtual_phase(seen, world.v2x.pedestrian_safety_margin);
    merge_item(obs.schedules, std::move(item), world.time);
  }

  for (const V2xMessage& m : accepted_messages) {
    switch (m.kind) {
      case MessageKind::spat: {
        ObservedSchedule item;
        item.source = Source::v2x;
        item.schedule = std::get<PhaseSchedule>(m.payload);
        merge_item(obs.schedules, std::move(item), world.time);
        break;
      }
      case MessageKind::pedestrian_occupancy: {
        const auto& occ = std::get<OccupancyPayload>(m.payload);
        ObservedSchedule item;
        item.source = Source::v2x;
        item.pedestrian = true;
        item.schedule.signal_position = occ.crossing_position;
        item.schedule.initial_phase = Phase::red;
        if (occ.estimated_clear_time > 0.0) {
          item.schedule.switch_times = {occ.estimated_clear_time};
        } else {
          item.schedule.initial_phase = Phase::green;
        }
        item.schedule.confidence = occ.confidence;
        merge_item(obs.schedules, std::move(item), world.time);
        break;
      }
      case MessageKind::speed_advice: {
        const double v = std::get<double>(m.payload);
        obs.advised_speed = obs.advised_speed ? std::min(*obs.advised_speed, v) : v;
        break;
      }
    }
  }
  for (const ObservedSchedule& s : obs.schedules) obs.conflicts += s.conflict ? 1 : 0;

  std::optional<TrackedVehicle> track;
  if (const auto pv = world.preceding_position()) {
    const double gap = *pv - ego;
    if (gap > 0.0 && gap <= sensors.camera_range) {
      track = TrackedVehicle{*pv, *world.preceding_velocity(), std::nullopt, 1.0};
    }
  }
  // Beyond camera range the nearest vehicle ahead that reported occupancy is
  // tracked from its own position report.
  if (!track) {
    for (const V2xMessage& m : accepted_messages) {
      if (m.kind != MessageKind::pedestrian_occupancy || m.sender_position <= ego) continue;
      if (!track || m.sender_position < track->position) {
        track = TrackedVehicle{m.sender_position, m.sender_velocity, std::nullopt, 1.0};
      }
    }
  }
  if (track) {
    // Occupancy reports from the tracked vehicle tell how long it waits.
    for (const V2xMessage& m : accepted_messages) {
      if (m.kind != MessageKind::pedestrian_occupancy) continue;
      if (std::abs(m.sender_position - track->position) > kSameSignal) continue;
      const auto& occ = std::get<OccupancyPayload>(m.payload);
      if (!track->hold_until || occ.estimated_clear_time > *track->hold_until) {
        track->hold_until = occ.estimated_clear_time;
        track->hold_confidence = occ.confidence;
      }
    }
    obs.preceding = track;
  }
  return obs;
}

std::vector<V2xMessage> broadcast(const WorldState& world, const SensorConfig& sensors) {
  std::vector<V2xMessage> out;
  if (!world.v2x.cooperation) return out;
  const double ego = world.ego.position;
  std::size_t index = 0;
  auto deliver = [&](V2xMessage m) {
    const std::size_t i = index++;
    if (std::abs(m.sender_position - ego) > sensors.v2v_range) return;
    if (dropped(world.v2x, world.step, i)) return;
    out.push_back(std::move(m));
  };

  for (std::size_t i = 0; i < world.signals.size(); ++i) {
    const PhaseSchedule& s = world.signals[i];
    V2xMessage m;
    m.kind = MessageKind::spat;
    m.sender = "signal-" + std::to_string(i);
    m.sender_position = s.signal_position;
    m.payload = s;
    m.ddi = world.v2x.spat_contract;
    m.timestamp = world.time;
    deliver(std::move(m));
  }

  if (const auto pv = world.preceding_position()) {
    for (const PedestrianEvent& e : world.pedestrians) {
      if (std::abs(e.crossing_position - *pv) > sensors.camera_range) continue;
      if (!world.pedestrian_present(e)) continue;
      V2xMessage m;
      m.kind = MessageKind::pedestrian_occupancy;
      m.sender = "preceding";
      m.sender_position = *pv;
      m.sender_velocity = *world.preceding_velocity();
      m.payload = OccupancyPayload{e.crossing_position, world.clear_time(e), e.confidence};
      m.ddi = world.v2x.occupancy_contract;
      m.timestamp = world.time;
      deliver(std::move(m));
      if (world.v2x.advised_speed) {
        V2xMessage a;
        a.kind = MessageKind::speed_advice;
        a.sender = "preceding";
        a.sender_position = *pv;
        a.sender_velocity = *world.preceding_velocity();
        a.payload = *world.v2x.advised_speed;
        a.ddi = world.v2x.advice_contract;
        a.timestamp = world.time;
        deliver(std::move(a));
      }
    }
  }
  return out;
}

WorldState step_world(const WorldState& world, double ego_acceleration, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_world: dt must be > 0");
  WorldState next = world;
  const double grade = world.route.grade_at(world.ego.position);
  next.last_ego_step = step_vehicle(world.vehicle, world.ego, ego_acceleration, grade, dt);
  next.ego = next.last_ego_step.state;
  next.step = world.step + 1;
  next.time = world.time + dt;
  return next;
}

}  // namespace tla

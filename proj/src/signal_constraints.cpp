#include "tla/signal_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tla {

namespace {

Phase flip(Phase p) { return p == Phase::red ? Phase::green : Phase::red; }

PhaseSchedule from_green_intervals(double position, const std::vector<TimeInterval>& greens,
                                   double confidence) {
  PhaseSchedule s;
  s.signal_position = position;
  s.confidence = confidence;
  if (greens.empty()) {
    s.initial_phase = Phase::red;
    return s;
  }
  s.initial_phase = greens.front().start <= 0.0 ? Phase::green : Phase::red;
  for (const TimeInterval& g : greens) {
    if (g.start > 0.0) s.switch_times.push_back(g.start);
    if (std::isfinite(g.end)) s.switch_times.push_back(g.end);
  }
  return s;
}

}  // namespace

void PhaseSchedule::validate() const {
  if (!std::isfinite(signal_position)) {
    throw std::invalid_argument("signal_position must be finite");
  }
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw std::invalid_argument("confidence must be in [0, 1]");
  }
  for (std::size_t i = 0; i < switch_times.size(); ++i) {
    if (!std::isfinite(switch_times[i]) || switch_times[i] < 0.0) {
      throw std::invalid_argument("switch times must be finite and >= 0");
    }
    if (i > 0 && !(switch_times[i] > switch_times[i - 1])) {
      throw std::invalid_argument("switch times must be strictly increasing");
    }
  }
}

void PedestrianEvent::validate() const {
  if (!std::isfinite(crossing_position)) {
    throw std::invalid_argument("crossing_position must be finite");
  }
  if (!(start_time >= 0.0)) throw std::invalid_argument("start_time must be >= 0");
  if (!(walking_speed > 0.0)) throw std::invalid_argument("walking_speed must be > 0");
  if (!(road_width > 0.0)) throw std::invalid_argument("road_width must be > 0");
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw std::invalid_argument("confidence must be in [0, 1]");
  }
}

Phase phase_at(const PhaseSchedule& s, double t) {
  const auto n = std::upper_bound(s.switch_times.begin(), s.switch_times.end(), t) -
                 s.switch_times.begin();
  return n % 2 == 0 ? s.initial_phase : flip(s.initial_phase);
}

double next_green_start(const PhaseSchedule& s, double t) {
  if (phase_at(s, t) == Phase::green) return t;
  // Red at t: the next switch after t (if any) turns the signal green.
  const auto it = std::upper_bound(s.switch_times.begin(), s.switch_times.end(), t);
  return it == s.switch_times.end() ? kInf : *it;
}

double tl_position_bound(const PhaseSchedule& s, double t, double stop_margin) {
  return phase_at(s, t) == Phase::red ? s.signal_position - stop_margin : kInf;
}

std::vector<TimeInterval> green_intervals(const PhaseSchedule& s) {
  std::vector<TimeInterval> out;
  Phase phase = s.initial_phase;
  double since = 0.0;
  for (double ts : s.switch_times) {
    if (phase == Phase::green) out.push_back({since, ts});
    phase = flip(phase);
    since = ts;
  }
  if (phase == Phase::green) out.push_back({since, kInf});
  return out;
}

std::vector<TimeInterval> red_intervals(const PhaseSchedule& s) {
  std::vector<TimeInterval> out;
  Phase phase = s.initial_phase;
  double since = 0.0;
  for (double ts : s.switch_times) {
    if (phase == Phase::red) out.push_back({since, ts});
    phase = flip(phase);
    since = ts;
  }
  if (phase == Phase::red) out.push_back({since, kInf});
  return out;
}

double virtual_red_duration(const PedestrianEvent& e, double safety_margin) {
  return e.road_width / e.walking_speed + safety_margin;
}

PhaseSchedule pedestrian_to_virtual_phase(const PedestrianEvent& e, double safety_margin) {
  const double t_end = e.start_time + virtual_red_duration(e, safety_margin);
  PhaseSchedule s;
  s.signal_position = e.crossing_position;
  s.confidence = e.confidence;
  if (e.start_time > 0.0) {
    s.initial_phase = Phase::green;
    s.switch_times = {e.start_time, t_end};
  } else {
    s.initial_phase = Phase::red;
    s.switch_times = {t_end};
  }
  return s;
}

PhaseSchedule apply_confidence(const PhaseSchedule& s, const ConfidencePolicy& policy) {
  const double c = std::clamp(s.confidence, 0.0, 1.0);
  const double margin = policy.margin_max * (1.0 - c);
  if (margin <= 0.0) return s;

  std::vector<TimeInterval> tightened;
  for (const TimeInterval& g : green_intervals(s)) {
    // A window open since t = 0 did not start with a switch.
    const double start = g.start <= 0.0 ? g.start : g.start + margin;
    const double end = std::isfinite(g.end) ? g.end - margin : g.end;
    if (start < end) tightened.push_back({start, end});
  }
  return from_green_intervals(s.signal_position, tightened, s.confidence);
}

std::vector<double> preceding_vehicle_bound(std::span<const double> predicted, double gap) {
  std::vector<double> out(predicted.size());
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    if (k > 0 && predicted[k] < predicted[k - 1]) {
      throw std::invalid_argument("preceding vehicle prediction must be non-decreasing");
    }
    out[k] = predicted[k] - gap;
  }
  return out;
}

bool ConstraintProfile::admits(int k, double p_prev, double p_next) const {
  if (sources.empty()) return p_next <= upper_position_bound[k];
  for (const BoundSource& src : sources) {
    const double b = src.bound[k];
    if (p_next <= b) continue;
    if (src.passable && p_prev > b) continue;
    return false;
  }
  return true;
}

ConstraintProfile merge_constraints(std::vector<BoundSource> sources,
                                    std::span<const double> speed_limits, double dt) {
  if (sources.empty() && speed_limits.empty()) {
    throw std::invalid_argument("merge_constraints: no sources and no speed limits");
  }
  const std::size_t np = speed_limits.empty() ? sources.front().bound.size()
                                              : speed_limits.size();
  if (np == 0) throw std::invalid_argument("merge_constraints: empty horizon");
  for (const BoundSource& src : sources) {
    if (src.bound.size() != np) {
      throw std::invalid_argument("merge_constraints: source '" + src.label +
                                  "' has mismatched length");
    }
  }

  ConstraintProfile out;
  out.dt = dt;
  out.horizon = static_cast<int>(np);
  out.upper_position_bound.assign(np, kInf);
  for (const BoundSource& src : sources) {
    for (std::size_t k = 0; k < np; ++k) {
      out.upper_position_bound[k] = std::min(out.upper_position_bound[k], src.bound[k]);
    }
  }
  if (speed_limits.empty()) {
    out.upper_velocity_bound.assign(np, kInf);
  } else {
    out.upper_velocity_bound.assign(speed_limits.begin(), speed_limits.end());
  }
  out.sources = std::move(sources);
  return out;
}

ConstraintProfile merge_constraints(const std::vector<std::vector<double>>& profiles,
                                    std::span<const double> speed_limits, double dt) {
  std::vector<BoundSource> sources;
  sources.reserve(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    sources.push_back({"source" + std::to_string(i), profiles[i], false});
  }
  return merge_constraints(std::move(sources), speed_limits, dt);
}

void flag_infeasibility(ConstraintProfile& profile, double position) {
  profile.infeasible = false;
  if (profile.horizon == 0) return;
  for (const BoundSource& src : profile.sources) {
    if (!src.passable && position > src.bound[0]) profile.infeasible = true;
  }
  if (profile.sources.empty() && position > profile.upper_position_bound[0]) {
    profile.infeasible = true;
  }
}

}  // namespace tla

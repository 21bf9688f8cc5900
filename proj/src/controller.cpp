#include "tla/controller.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace tla {

namespace {

constexpr double kStationary = 0.1;  // m/s

struct PlanningInputs {
  ConstraintProfile profile;
  std::vector<PhaseSchedule> schedules;  // tightened, still ahead of the ego
  std::optional<std::vector<double>> preceding_bound;
};

PlanningInputs build_inputs(const ControllerSettings& s, const Observation& obs) {
  const MpcConfig& mpc = s.mpc;
  const int np = mpc.horizon;
  const double dt = mpc.dt;
  const double p0 = obs.ego.position;
  const double v0 = obs.ego.velocity;

  PlanningInputs in;
  std::vector<BoundSource> sources;
  for (const ObservedSchedule& item : obs.schedules) {
    if (p0 >= item.schedule.signal_position) continue;
    PhaseSchedule tightened = apply_confidence(item.schedule, s.confidence);
    BoundSource src;
    src.label = (item.pedestrian ? "crossing@" : "signal@") +
                std::to_string(item.schedule.signal_position);
    src.passable = true;
    src.bound.resize(np);
    for (int k = 0; k < np; ++k) {
      src.bound[k] = tl_position_bound(tightened, obs.time + (k + 1) * dt, mpc.stop_margin);
    }
    sources.push_back(std::move(src));
    in.schedules.push_back(std::move(tightened));
  }

  if (obs.preceding) {
    const std::vector<double> predicted =
        predict_preceding(*obs.preceding, obs.time, dt, np, s.confidence, s.departure_accel,
                          s.route.legal_limit_at(obs.preceding->position));
    BoundSource src;
    src.label = "preceding";
    src.passable = false;
    src.bound = preceding_vehicle_bound(predicted, mpc.safety_gap);
    in.preceding_bound = src.bound;
    sources.push_back(std::move(src));
  }

  double v_top = v0;
  for (const RoutePiece& piece : s.route.pieces) v_top = std::max(v_top, piece.legal_limit);
  const double here_limit = s.route.legal_limit_at(p0);
  const bool follow_advice =
      obs.advised_speed && *obs.advised_speed > 0.0 && *obs.advised_speed <= here_limit;

  std::vector<double> limits(np);
  for (int k = 0; k < np; ++k) {
    const double reach = p0 + (k + 1) * dt * v_top;
    limits[k] = s.route.min_limit(p0, reach);
    if (follow_advice) {
      const double cap = std::max(*obs.advised_speed, v0 - s.advice_decel * (k + 1) * dt);
      limits[k] = std::min(limits[k], cap);
    }
  }

  in.profile = merge_constraints(std::move(sources), limits, dt);
  in.profile.grade.resize(np);
  for (int k = 0; k < np; ++k) {
    in.profile.grade[k] = s.route.grade_at(p0 + v0 * k * dt);
  }
  flag_infeasibility(in.profile, p0);
  return in;
}

}  // namespace

std::vector<double> predict_preceding(const TrackedVehicle& track, double t_now, double dt,
                                      int horizon, const ConfidencePolicy& confidence,
                                      double departure_accel, double speed_limit) {
  std::vector<double> out(horizon);
  const bool waiting = track.hold_until && track.velocity <= kStationary;
  const double c = std::clamp(track.hold_confidence, 0.0, 1.0);
  const double release =
      waiting ? *track.hold_until + confidence.margin_max * (1.0 - c) : -kInf;
  const double ramp = departure_accel > 0.0 ? speed_limit / departure_accel : kInf;
  for (int k = 0; k < horizon; ++k) {
    const double tau = (k + 1) * dt;
    if (!waiting) {
      out[k] = track.position + track.velocity * tau;
      continue;
    }
    const double moving = t_now + tau - release;
    if (moving <= 0.0 || departure_accel <= 0.0) {
      out[k] = track.position;
    } else if (moving <= ramp) {
      out[k] = track.position + 0.5 * departure_accel * moving * moving;
    } else {
      out[k] = track.position + 0.5 * speed_limit * ramp + speed_limit * (moving - ramp);
    }
  }
  return out;
}

Controller::Controller(ControllerSettings settings) : settings_(std::move(settings)) {
  settings_.mpc.validate();
  settings_.weights.validate();
  settings_.vehicle.validate();
  settings_.route.validate();
  if (!(settings_.advice_decel > 0.0)) {
    throw std::invalid_argument("controller.advice_decel must be > 0");
  }
  if (!(settings_.departure_accel >= 0.0)) {
    throw std::invalid_argument("controller.departure_accel must be >= 0");
  }
}

ConstraintProfile Controller::constraints_for(const Observation& observation) const {
  return build_inputs(settings_, observation).profile;
}

ControlDecision Controller::step(const Observation& obs) {
  const MpcConfig& mpc = settings_.mpc;
  PlanningInputs in = build_inputs(settings_, obs);

  ReferenceRequest req;
  req.ego_position = obs.ego.position;
  req.legal_limit = settings_.route.legal_limit_at(obs.ego.position);
  req.schedules = in.schedules;
  req.t_now = obs.time;
  req.horizon = mpc.horizon;
  req.dt = mpc.dt;
  if (in.preceding_bound) req.preceding_bound = std::span<const double>(*in.preceding_bound);
  req.stop_margin = mpc.stop_margin;

  ControlDecision d;
  d.reference = build_reference(req);

  std::optional<std::span<const double>> warm;
  if (!warm_start_.empty()) warm = std::span<const double>(warm_start_);
  d.solution = solve(mpc, settings_.vehicle, settings_.weights, obs.ego, in.profile, d.reference,
                     warm, &d.stats);
  d.constraints = std::move(in.profile);
  d.acceleration = d.solution.controls.front();

  if (d.solution.feasible) {
    warm_start_ = d.solution.warm_start_tail;
    warm_start_.push_back(0.0);
  } else {
    warm_start_.clear();
  }
  return d;
}

}  // namespace tla

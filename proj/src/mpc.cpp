#include "tla/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tla {

void CostWeights::validate() const {
  if (!(w_energy >= 0.0 && w_comfort >= 0.0 && w_time >= 0.0)) {
    throw std::invalid_argument("cost weights must be >= 0");
  }
  if (w_energy == 0.0 && w_comfort == 0.0 && w_time == 0.0) {
    throw std::invalid_argument("cost weights must not all be zero");
  }
}

void MpcConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("mpc.dt must be > 0");
  if (horizon < 1) throw std::invalid_argument("mpc.horizon must be >= 1");
  if (control_grid.empty()) throw std::invalid_argument("mpc.control_grid must not be empty");
  if (!std::is_sorted(control_grid.begin(), control_grid.end()) ||
      std::adjacent_find(control_grid.begin(), control_grid.end()) != control_grid.end()) {
    throw std::invalid_argument("mpc.control_grid must be strictly increasing");
  }
  if (std::find(control_grid.begin(), control_grid.end(), 0.0) == control_grid.end()) {
    throw std::invalid_argument("mpc.control_grid must contain 0");
  }
  if (!(velocity_grid_resolution > 0.0)) {
    throw std::invalid_argument("mpc.velocity_grid_resolution must be > 0");
  }
  if (!(position_grid_resolution > 0.0)) {
    throw std::invalid_argument("mpc.position_grid_resolution must be > 0");
  }
  if (!(stop_margin >= 0.0)) throw std::invalid_argument("mpc.stop_margin must be >= 0");
  if (!(safety_gap >= 0.0)) throw std::invalid_argument("mpc.safety_gap must be >= 0");
}

double stage_cost(const VehicleParams& params, const CostWeights& w, double velocity,
                  double acceleration, double dt, double grade) {
  const KinematicStep s = advance(0.0, velocity, acceleration, dt);
  return w.w_energy * step_battery_power(params, velocity, s, grade) * dt +
         w.w_comfort * s.acceleration * s.acceleration * dt;
}

namespace {

void check_dimensions(const MpcConfig& cfg, const ConstraintProfile& c,
                      const ReferenceTrajectory& ref) {
  const auto np = static_cast<std::size_t>(cfg.horizon);
  if (c.horizon != cfg.horizon || c.upper_position_bound.size() != np ||
      c.upper_velocity_bound.size() != np || (!c.grade.empty() && c.grade.size() != np)) {
    throw std::invalid_argument("solve: constraint profile does not match the horizon");
  }
  if (ref.positions.size() != np) {
    throw std::invalid_argument("solve: reference does not match the horizon");
  }
  if (std::abs(c.dt - cfg.dt) > 1e-12 || std::abs(ref.dt - cfg.dt) > 1e-12) {
    throw std::invalid_argument("solve: dt mismatch between config, constraints and reference");
  }
}

double step_time_cost(const MpcConfig& cfg, const CostWeights& w,
                      const ReferenceTrajectory& ref, int k, double position) {
  if (cfg.objective != TravelTimeObjective::lateness) return 0.0;
  return w.w_time * std::max(0.0, ref.positions[k] - position);
}

double final_time_cost(const MpcConfig& cfg, const CostWeights& w,
                       const ReferenceTrajectory& ref, double position) {
  if (cfg.objective != TravelTimeObjective::terminal) return 0.0;
  return terminal_cost(position, ref.terminal_position, w.w_time);
}

struct Node {
  double cost;
  double position;
  double velocity;
  std::int32_t parent;
  std::int16_t control;
  std::int8_t lattice;  // 0: anchored at zero, 1: anchored at v0
};

struct Layer {
  std::vector<Node> nodes;
};

struct Grid {
  double dv = 0.0;
  double dp = 0.0;
  double v0 = 0.0;
  double p0 = 0.0;
  bool two_lattices = false;
  long long zero_slots = 0;   // slots of the zero-anchored lattice
  long long anchored_min = 0; // lowest j of the v0-anchored lattice
  long long anchored_slots = 0;

  long long slots() const { return zero_slots + anchored_slots; }

  // -1 when outside the grid.
  long long slot(int lattice, double v) const {
    if (lattice == 0) {
      const long long j = std::llround(v / dv);
      return (j >= 0 && j < zero_slots) ? j : -1;
    }
    const long long j = std::llround((v - v0) / dv) - anchored_min;
    return (j >= 0 && j < anchored_slots) ? zero_slots + j : -1;
  }
  long long bin(double p) const { return std::llround((p - p0) / dp); }
};

struct Result {
  bool found = false;
  std::vector<int> controls;  // indices into the control grid
  double cost = 0.0;
};

Result run_dp(const MpcConfig& cfg, const VehicleParams& params, const CostWeights& w,
              const VehicleState& x0, const ConstraintProfile& c,
              const ReferenceTrajectory& ref, double incumbent, SolveStats* stats) {
  const int np = cfg.horizon;
  const double dt = cfg.dt;
  const auto& grid_u = cfg.control_grid;
  const int nu = static_cast<int>(grid_u.size());
  const double a_max = std::max(0.0, grid_u.back());

  Grid g;
  g.dv = cfg.velocity_grid_resolution;
  g.dp = cfg.position_grid_resolution;
  g.v0 = x0.velocity;
  g.p0 = x0.position;

  double v_cap = x0.velocity + np * dt * a_max;
  double vub_max = 0.0;
  bool vub_finite = true;
  for (double v : c.upper_velocity_bound) {
    if (std::isfinite(v)) vub_max = std::max(vub_max, v);
    else vub_finite = false;
  }
  if (vub_finite) v_cap = std::min(v_cap, std::max(vub_max, x0.velocity));
  v_cap = std::max(v_cap, x0.velocity) + 2.0 * g.dv;

  const double ratio = x0.velocity / g.dv;
  g.two_lattices = std::abs(ratio - std::round(ratio)) > 1e-9;
  g.zero_slots = static_cast<long long>(std::ceil(v_cap / g.dv)) + 2;
  if (g.two_lattices) {
    g.anchored_min = -static_cast<long long>(std::floor(ratio)) - 1;
    const long long top = static_cast<long long>(std::ceil((v_cap - x0.velocity) / g.dv)) + 2;
    g.anchored_slots = top - g.anchored_min + 1;
  }

  // Lower bound on the cost of any single step, used only for pruning
  // against a feasible warm start.
  const double step_lb = w.w_energy * (params.aux_power - params.max_regen_power) * dt;
  const bool prune = std::isfinite(incumbent);
  const double prune_tol = 1e-9 * std::max(1.0, std::abs(incumbent));

  std::vector<Layer> layers(np + 1);
  layers[0].nodes.push_back(
      {0.0, x0.position, x0.velocity, -1, -1, static_cast<std::int8_t>(g.two_lattices ? 1 : 0)});

  std::vector<std::int32_t> index;  // dense (slot, bin) -> node, reused per layer
  std::vector<std::size_t> touched;

  for (int k = 0; k < np; ++k) {
    const Layer& cur = layers[k];
    Layer& next = layers[k + 1];
    if (cur.nodes.empty()) break;

    double v_hi = 0.0;
    double p_lo = kInf;
    for (const Node& n : cur.nodes) {
      v_hi = std::max(v_hi, n.velocity);
      p_lo = std::min(p_lo, n.position);
    }
    double p_hi = -kInf;
    for (const Node& n : cur.nodes) p_hi = std::max(p_hi, n.position);
    const long long b_lo = g.bin(p_lo) - 1;
    const long long b_hi = g.bin(p_hi + dt * (v_hi + 0.5 * a_max * dt)) + 1;
    const long long n_bins = b_hi - b_lo + 1;
    const std::size_t dense = static_cast<std::size_t>(g.slots() * n_bins);
    if (index.size() < dense) index.resize(dense, -1);

    const double grade = c.grade_at(k);
    const double vub = c.upper_velocity_bound[k];
    const double remaining_lb = step_lb * (np - k - 1);

    for (std::size_t pi = 0; pi < cur.nodes.size(); ++pi) {
      const Node& n = cur.nodes[pi];
      for (int ui = 0; ui < nu; ++ui) {
        const double a = grid_u[ui];
        if (stats) ++stats->expanded;
        const double f_cmd = traction_force(params, n.velocity, a, grade);
        if (f_cmd > params.max_traction_force || f_cmd < -params.max_brake_force) continue;

        const KinematicStep s = advance(n.position, n.velocity, a, dt);
        if (!(s.velocity <= vub)) continue;
        if (!c.admits(k, n.position, s.position)) continue;

        const double cost = n.cost +
                            w.w_energy * step_battery_power(params, n.velocity, s, grade) * dt +
                            w.w_comfort * s.acceleration * s.acceleration * dt +
                            step_time_cost(cfg, w, ref, k, s.position);
        if (prune && cost + remaining_lb > incumbent + prune_tol) {
          if (stats) ++stats->pruned;
          continue;
        }

        const std::int8_t lattice = s.velocity == 0.0 ? 0 : n.lattice;
        const long long slot = g.slot(lattice, s.velocity);
        const long long b = g.bin(s.position) - b_lo;
        if (slot < 0 || b < 0 || b >= n_bins) continue;
        const std::size_t cell = static_cast<std::size_t>(slot * n_bins + b);

        const std::int32_t existing = index[cell];
        if (existing < 0) {
          index[cell] = static_cast<std::int32_t>(next.nodes.size());
          touched.push_back(cell);
          next.nodes.push_back({cost, s.position, s.velocity, static_cast<std::int32_t>(pi),
                                static_cast<std::int16_t>(ui), lattice});
          continue;
        }
        Node& old = next.nodes[existing];
        bool better = cost < old.cost;
        if (cost == old.cost) {
          const double a_old = std::abs(grid_u[old.control]);
          better = std::abs(a) < a_old || (std::abs(a) == a_old && ui < old.control);
        }
        if (better) {
          old = {cost, s.position, s.velocity, static_cast<std::int32_t>(pi),
                 static_cast<std::int16_t>(ui), lattice};
        }
      }
    }
    for (std::size_t cell : touched) index[cell] = -1;
    touched.clear();
  }

  Result r;
  const Layer& last = layers[np];
  std::int32_t best = -1;
  double best_cost = kInf;
  for (std::size_t i = 0; i < last.nodes.size(); ++i) {
    const Node& n = last.nodes[i];
    const double total = n.cost + final_time_cost(cfg, w, ref, n.position);
    if (total < best_cost) {
      best_cost = total;
      best = static_cast<std::int32_t>(i);
    }
  }
  if (best < 0) return r;

  r.found = true;
  r.cost = best_cost;
  r.controls.assign(np, 0);
  std::int32_t at = best;
  for (int k = np; k >= 1; --k) {
    const Node& n = layers[k].nodes[at];
    r.controls[k - 1] = n.control;
    at = n.parent;
  }
  return r;
}

}  // namespace

std::optional<MpcSolution> evaluate_sequence(const MpcConfig& cfg, const VehicleParams& params,
                                             const CostWeights& w, const VehicleState& x0,
                                             const ConstraintProfile& c,
                                             const ReferenceTrajectory& ref,
                                             std::span<const double> controls) {
  check_dimensions(cfg, c, ref);
  if (static_cast<int>(controls.size()) != cfg.horizon) {
    throw std::invalid_argument("evaluate_sequence: control length mismatch");
  }
  MpcSolution sol;
  sol.controls.assign(controls.begin(), controls.end());
  double p = x0.position;
  double v = x0.velocity;
  for (int k = 0; k < cfg.horizon; ++k) {
    const double a = controls[k];
    const double grade = c.grade_at(k);
    const double f_cmd = traction_force(params, v, a, grade);
    if (f_cmd > params.max_traction_force || f_cmd < -params.max_brake_force) return std::nullopt;
    const KinematicStep s = advance(p, v, a, cfg.dt);
    if (!(s.velocity <= c.upper_velocity_bound[k])) return std::nullopt;
    if (!c.admits(k, p, s.position)) return std::nullopt;

    sol.cost_breakdown.energy += w.w_energy * step_battery_power(params, v, s, grade) * cfg.dt;
    sol.cost_breakdown.comfort += w.w_comfort * s.acceleration * s.acceleration * cfg.dt;
    sol.cost_breakdown.time += step_time_cost(cfg, w, ref, k, s.position);
    p = s.position;
    v = s.velocity;
    sol.predicted_positions.push_back(p);
    sol.predicted_velocities.push_back(v);
  }
  sol.cost_breakdown.time += final_time_cost(cfg, w, ref, p);
  sol.total_cost =
      sol.cost_breakdown.energy + sol.cost_breakdown.comfort + sol.cost_breakdown.time;
  sol.feasible = true;
  sol.warm_start_tail.assign(sol.controls.begin() + 1, sol.controls.end());
  return sol;
}

MpcSolution emergency_fallback(const MpcConfig& cfg, const VehicleParams& params,
                               const VehicleState& x0) {
  MpcSolution sol;
  const double a = -params.max_brake_force / params.mass;
  sol.controls.assign(cfg.horizon, a);
  VehicleState s = x0;
  for (int k = 0; k < cfg.horizon; ++k) {
    s = step_vehicle(params, s, a, 0.0, cfg.dt).state;
    sol.predicted_positions.push_back(s.position);
    sol.predicted_velocities.push_back(s.velocity);
  }
  sol.total_cost = kInf;
  sol.feasible = false;
  sol.emergency = true;
  sol.warm_start_tail.assign(sol.controls.begin() + 1, sol.controls.end());
  return sol;
}

MpcSolution solve(const MpcConfig& cfg, const VehicleParams& params, const CostWeights& w,
                  const VehicleState& x0, const ConstraintProfile& c,
                  const ReferenceTrajectory& ref,
                  std::optional<std::span<const double>> warm_start, SolveStats* stats) {
  check_dimensions(cfg, c, ref);

  double incumbent = kInf;
  if (warm_start && static_cast<int>(warm_start->size()) == cfg.horizon) {
    if (auto ws = evaluate_sequence(cfg, params, w, x0, c, ref, *warm_start)) {
      incumbent = ws->total_cost;
    }
  }

  Result r = run_dp(cfg, params, w, x0, c, ref, incumbent, stats);
  if (std::isfinite(incumbent)) {
    const double tol = 1e-9 * std::max(1.0, std::abs(incumbent));
    if (r.found && r.cost <= incumbent + tol) {
      if (stats) stats->used_warm_start = true;
    } else {
      // The warm start beat the grid optimum; rerun unpruned so the result
      // does not depend on it.
      r = run_dp(cfg, params, w, x0, c, ref, kInf, stats);
    }
  }
  if (!r.found) return emergency_fallback(cfg, params, x0);

  std::vector<double> controls(cfg.horizon);
  for (int k = 0; k < cfg.horizon; ++k) controls[k] = cfg.control_grid[r.controls[k]];
  auto sol = evaluate_sequence(cfg, params, w, x0, c, ref, controls);
  if (!sol) {
    throw std::logic_error("solve: optimal sequence failed re-evaluation");
  }
  return *sol;
}

}  // namespace tla

#pragma once

#include "tla/longitudinal.hpp"
#include "tla/reference.hpp"
#include "tla/signal_constraints.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tla {

struct CostWeights {
  double w_energy = 1e-3;  // per J
  double w_comfort = 0.1;  // per (m/s^2)^2 * s
  double w_time = 0.2;     // per m of shortfall per step

  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

enum class TravelTimeObjective { lateness, terminal };

struct MpcConfig {
  double dt = 0.5;
  int horizon = 40;
  std::vector<double> control_grid{-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
  double velocity_grid_resolution = 0.25;  // m/s
  double position_grid_resolution = 0.5;   // m
  double stop_margin = 2.0;                // m
  double safety_gap = 10.0;                // m
  TravelTimeObjective objective = TravelTimeObjective::lateness;

  void validate() const;
  bool operator==(const MpcConfig&) const = default;
};

struct CostBreakdown {
  double energy = 0.0;
  double comfort = 0.0;
  double time = 0.0;
};

struct MpcSolution {
  std::vector<double> controls;  // commanded accelerations, m/s^2
  std::vector<double> predicted_positions;
  std::vector<double> predicted_velocities;
  double total_cost = 0.0;
  CostBreakdown cost_breakdown;
  bool feasible = false;
  bool emergency = false;
  std::vector<double> warm_start_tail;  // controls[1..]
};

double stage_cost(const VehicleParams& params, const CostWeights& weights, double velocity,
                  double acceleration, double dt, double grade = 0.0);

struct SolveStats {
  long long expanded = 0;  // transitions evaluated
  long long pruned = 0;
  bool used_warm_start = false;
};

/// Minimum-cost control sequence over the discretized control grid.
///
/// Dynamic programming over a (velocity, position) grid: each node keeps the
/// exact state of its cheapest incoming path. When the control grid is a
/// multiple of velocity_grid_resolution / dt and position_grid_resolution is
/// dt * velocity_grid_resolution / 2, distinct reachable states never share
/// a node and the result equals exhaustive enumeration.
///
/// Infeasible problems return feasible = false with a constant
/// maximum-deceleration fallback.
MpcSolution solve(const MpcConfig& config, const VehicleParams& params,
                  const CostWeights& weights, const VehicleState& x0,
                  const ConstraintProfile& constraints, const ReferenceTrajectory& reference,
                  std::optional<std::span<const double>> warm_start = std::nullopt,
                  SolveStats* stats = nullptr);

/// Constant maximum-brake rollout, used when no feasible plan exists.
MpcSolution emergency_fallback(const MpcConfig& config, const VehicleParams& params,
                               const VehicleState& x0);

/// Evaluates one control sequence under the solver's own rules. Returns
/// nullopt when a step leaves the force envelope or violates a bound.
std::optional<MpcSolution> evaluate_sequence(const MpcConfig& config,
                                             const VehicleParams& params,
                                             const CostWeights& weights,
                                             const VehicleState& x0,
                                             const ConstraintProfile& constraints,
                                             const ReferenceTrajectory& reference,
                                             std::span<const double> controls);

}  // namespace tla

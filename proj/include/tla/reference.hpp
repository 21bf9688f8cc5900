#pragma once

#include "tla/signal_constraints.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tla {

/// Travel-time reference: where the vehicle should be at each step if it
/// drove at constant speed to reach every downstream signal at its earliest
/// reachable green.
struct ReferenceTrajectory {
  double dt = 0.0;
  std::vector<double> positions;  // entry k is the target after k + 1 steps
  double terminal_position = 0.0; // d_Hp
  double construction_speed = 0.0;
};

struct ReferenceRequest {
  double ego_position = 0.0;
  double legal_limit = 0.0;        // m/s
  std::span<const PhaseSchedule> schedules;
  double t_now = 0.0;
  int horizon = 1;
  double dt = 0.5;
  std::optional<std::span<const double>> preceding_bound;
  double stop_margin = 2.0;        // where a permanently red signal pins the reference
};

ReferenceTrajectory build_reference(const ReferenceRequest& request);

/// weight * sum_k max(0, reference[k] - actual[k]).
double lateness_penalty(std::span<const double> actual_positions,
                        const ReferenceTrajectory& reference, double weight);

/// weight * max(0, d_Hp - final_position).
double terminal_cost(double final_position, double d_hp, double weight);

}  // namespace tla

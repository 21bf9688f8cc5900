#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tla {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Phase { red, green };

/// Switching program of one signalized location.
///
/// `switch_times` alternate starting from the opposite of `initial_phase`:
/// with an initial red phase the list reads t_g1, t_r1, t_g2, ... A switch
/// takes effect at its own instant, so a green phase covers [t_g, t_r).
/// The last phase persists forever.
struct PhaseSchedule {
  double signal_position = 0.0;  // m
  Phase initial_phase = Phase::green;
  std::vector<double> switch_times;  // s, strictly increasing
  double confidence = 1.0;

  /// Throws std::invalid_argument.
  void validate() const;

  bool operator==(const PhaseSchedule&) const = default;
};

struct PedestrianEvent {
  double crossing_position = 0.0;  // m
  double start_time = 0.0;         // s, t_p
  double walking_speed = 1.4;      // m/s, v_p
  double road_width = 7.0;         // m
  double confidence = 1.0;

  void validate() const;

  bool operator==(const PedestrianEvent&) const = default;
};

struct ConfidencePolicy {
  double margin_max = 5.0;  // s, applied in full at confidence 0
  bool operator==(const ConfidencePolicy&) const = default;
};

/// Half-open interval [start, end); end may be +inf.
struct TimeInterval {
  double start = 0.0;
  double end = kInf;
};

Phase phase_at(const PhaseSchedule& schedule, double t);

/// `t` when green at `t`, otherwise the next red-to-green switch, +inf if none.
double next_green_start(const PhaseSchedule& schedule, double t);

double tl_position_bound(const PhaseSchedule& schedule, double t, double stop_margin);

std::vector<TimeInterval> green_intervals(const PhaseSchedule& schedule);
std::vector<TimeInterval> red_intervals(const PhaseSchedule& schedule);

/// t_red = road_width / v_p + safety margin.
double virtual_red_duration(const PedestrianEvent& event, double safety_margin = 1.0);

/// Red on [t_p, t_p + t_red), green elsewhere.
PhaseSchedule pedestrian_to_virtual_phase(const PedestrianEvent& event,
                                          double safety_margin = 1.0);

/// Delays every red-to-green switch and advances every green-to-red switch by
/// margin_max * (1 - confidence). Green windows that collapse are removed.
PhaseSchedule apply_confidence(const PhaseSchedule& schedule, const ConfidencePolicy& policy);

std::vector<double> preceding_vehicle_bound(std::span<const double> predicted_positions,
                                            double safety_gap);

/// One contributor to the position constraint.
///
/// A passable source is a stop line: a vehicle that is already beyond the
/// line at the previous step is not held back by it (it crossed while the
/// line was open). Non-passable sources (a preceding vehicle) always bind.
struct BoundSource {
  std::string label;
  std::vector<double> bound;  // per step, m, may be +inf
  bool passable = false;
};

/// Time-indexed upper bounds over the prediction horizon. Entry k applies to
/// the state reached after k + 1 steps.
struct ConstraintProfile {
  double dt = 0.0;
  int horizon = 0;
  std::vector<double> upper_position_bound;  // pointwise min over sources
  std::vector<double> upper_velocity_bound;
  std::vector<double> grade;                 // rad per step, empty means flat
  std::vector<BoundSource> sources;
  bool infeasible = false;

  /// Whether moving from `p_prev` to `p_next` at step `k` respects every source.
  bool admits(int k, double p_prev, double p_next) const;

  double grade_at(int k) const { return grade.empty() ? 0.0 : grade[k]; }
};

ConstraintProfile merge_constraints(std::vector<BoundSource> sources,
                                    std::span<const double> speed_limits, double dt);

/// Plain per-step bounds, all treated as non-passable.
ConstraintProfile merge_constraints(const std::vector<std::vector<double>>& profiles,
                                    std::span<const double> speed_limits, double dt);

/// Sets `profile.infeasible` when a vehicle at `position` already violates a
/// non-passable source at step 0.
void flag_infeasibility(ConstraintProfile& profile, double position);

}  // namespace tla

#pragma once

#include "tla/longitudinal.hpp"
#include "tla/signal_constraints.hpp"
#include "tla/v2x.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tla {

struct RoutePiece {
  double start = 0.0;        // m
  double end = 0.0;          // m
  double grade = 0.0;        // rad, positive uphill
  double legal_limit = 0.0;  // m/s
  bool operator==(const RoutePiece&) const = default;
};

/// Contiguous pieces starting at 0. Positions past the end use the last piece.
struct Route {
  std::vector<RoutePiece> pieces;

  void validate() const;
  double length() const;
  const RoutePiece& piece_at(double position) const;
  double grade_at(double position) const { return piece_at(position).grade; }
  double legal_limit_at(double position) const { return piece_at(position).legal_limit; }
  /// Lowest legal limit on [from, to].
  double min_limit(double from, double to) const;
  bool operator==(const Route&) const = default;
};

/// Constant-acceleration leg of a scripted vehicle.
struct ScriptSegment {
  double duration = 0.0;      // s
  double acceleration = 0.0;  // m/s^2
  bool operator==(const ScriptSegment&) const = default;
};

/// Replayed trajectory sampled at the simulation step. After the script ends
/// the vehicle keeps its final position and velocity.
struct ScriptedVehicle {
  double dt = 0.0;
  std::vector<double> positions;
  std::vector<double> velocities;

  static ScriptedVehicle from_segments(double initial_position, double initial_velocity,
                                       const std::vector<ScriptSegment>& segments, double dt);
  double position_at(long step) const;
  double velocity_at(long step) const;
};

struct SensorConfig {
  double camera_range = 50.0;  // m
  double v2v_range = 200.0;    // m

  void validate() const;
  bool operator==(const SensorConfig&) const = default;
};

/// What the infrastructure and the preceding vehicle transmit.
struct V2xSettings {
  bool cooperation = true;  // off: the ego receives nothing
  std::shared_ptr<const ddi::DdiContract> spat_contract;
  std::shared_ptr<const ddi::DdiContract> occupancy_contract;
  std::shared_ptr<const ddi::DdiContract> advice_contract;
  std::optional<double> advised_speed;  // m/s, sent with occupancy when set
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
  double pedestrian_safety_margin = 1.0;  // s, added to the crossing time
};

struct WorldState {
  double time = 0.0;
  long step = 0;
  VehicleState ego;
  VehicleParams vehicle;
  StepResult last_ego_step;
  std::optional<ScriptedVehicle> preceding;
  std::vector<PhaseSchedule> signals;
  std::vector<PedestrianEvent> pedestrians;
  Route route;
  V2xSettings v2x;

  std::optional<double> preceding_position() const;
  std::optional<double> preceding_velocity() const;
  /// A pedestrian is at the curb or on the road until the crossing clears.
  bool pedestrian_present(const PedestrianEvent& event) const;
  double clear_time(const PedestrianEvent& event) const;
};

enum class Source { camera, v2x };

struct ObservedSchedule {
  PhaseSchedule schedule;
  Source source = Source::camera;
  bool pedestrian = false;
  bool conflict = false;  // camera and V2X disagreed on the current phase
};

struct TrackedVehicle {
  double position = 0.0;
  double velocity = 0.0;
  // Set when the vehicle itself reported waiting at an occupied crossing.
  std::optional<double> hold_until;  // s, absolute
  double hold_confidence = 1.0;
};

struct Observation {
  double time = 0.0;
  VehicleState ego;
  std::vector<ObservedSchedule> schedules;
  std::optional<TrackedVehicle> preceding;
  std::optional<double> advised_speed;
  int conflicts = 0;
};

/// Camera items within range plus every accepted V2X item. The same signal
/// or crossing seen twice becomes one entry carrying the higher confidence.
/// For signals the V2X timing is kept when the current phase agrees; on
/// disagreement the camera view wins and the entry is flagged. The preceding
/// vehicle comes from the camera, or from its own occupancy reports when out
/// of camera range.
Observation observe(const WorldState& world, const SensorConfig& sensors,
                    const std::vector<V2xMessage>& accepted_messages);

/// Messages delivered to the ego this step.
std::vector<V2xMessage> broadcast(const WorldState& world, const SensorConfig& sensors);

WorldState step_world(const WorldState& world, double ego_acceleration, double dt);

}  // namespace tla

#pragma once

#include "tla/longitudinal.hpp"
#include "tla/mpc.hpp"
#include "tla/reference.hpp"
#include "tla/signal_constraints.hpp"
#include "tla/world.hpp"

#include <vector>

namespace tla {

struct ControllerSettings {
  MpcConfig mpc;
  CostWeights weights;
  VehicleParams vehicle;
  ConfidencePolicy confidence;
  Route route;  // on-board map: legal limits and grades
  double advice_decel = 1.0;  // m/s^2, how fast an accepted speed advice is approached
  double departure_accel = 1.0;  // m/s^2, assumed for a waiting preceding vehicle
};

/// Predicted positions of a tracked preceding vehicle at t_now + (k+1)*dt.
///
/// Constant velocity by default. A stationary vehicle that reported waiting
/// until a known time is held there (the wait stretched by the confidence
/// margin) and then assumed to pull away at `departure_accel` up to
/// `speed_limit`.
std::vector<double> predict_preceding(const TrackedVehicle& track, double t_now, double dt,
                                      int horizon, const ConfidencePolicy& confidence,
                                      double departure_accel, double speed_limit);

struct ControlDecision {
  double acceleration = 0.0;  // commanded for the next step
  MpcSolution solution;
  ConstraintProfile constraints;
  ReferenceTrajectory reference;
  SolveStats stats;
};

/// Receding-horizon loop state: holds the shifted previous plan between calls.
class Controller {
 public:
  explicit Controller(ControllerSettings settings);

  ControlDecision step(const Observation& observation);

  /// Builds the horizon constraints from an observation without solving.
  ConstraintProfile constraints_for(const Observation& observation) const;
  const ControllerSettings& settings() const { return settings_; }

 private:
  ControllerSettings settings_;
  std::vector<double> warm_start_;
};

}  // namespace tla

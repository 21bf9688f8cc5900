#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tla {

inline constexpr double kGravity = 9.81;  // m/s^2

/// Point-mass vehicle with an electric powertrain.
///
/// Resistive force is c0 + c1*v + c2*v^2 plus the grade term. Braking power
/// beyond `max_regen_power` goes to the friction brakes and never reaches the
/// battery.
struct VehicleParams {
  double mass = 1500.0;                 // kg
  double rolling_coeff_c0 = 120.0;      // N
  double linear_drag_c1 = 2.0;          // N*s/m
  double aero_drag_c2 = 0.4;            // N*s^2/m^2
  double max_traction_force = 4000.0;   // N
  double max_brake_force = 8000.0;      // N, friction + regen
  double max_regen_power = 40000.0;     // W
  double drive_efficiency = 0.85;
  double regen_efficiency = 0.85;
  double aux_power = 300.0;             // W

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  bool operator==(const VehicleParams&) const = default;
};

struct VehicleState {
  double position = 0.0;            // m along route
  double velocity = 0.0;            // m/s, never negative
  double battery_energy_used = 0.0; // J, regen decreases it
  double time = 0.0;                // s

  bool operator==(const VehicleState&) const = default;
};

/// Discrete double integrator, x = (position, velocity), u = acceleration.
/// The output y reads out velocity.
struct StateSpaceModel {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;
  Eigen::RowVector2d C;
  double D = 0.0;
  double dt = 0.0;

  static StateSpaceModel double_integrator(double dt);
};

/// Horizon-expanded model: x_pred = M*x0 + N*u, y_pred = E*x0 + F*u.
/// x_pred stacks (position, velocity) for steps 1..Np.
struct PredictionMatrices {
  Eigen::MatrixXd M;  // 2Np x 2
  Eigen::MatrixXd N;  // 2Np x Np, lower block-triangular
  Eigen::MatrixXd E;  // Np x 2
  Eigen::MatrixXd F;  // Np x Np, lower triangular
  int horizon = 0;
};

struct TrajectoryPoint {
  double position = 0.0;
  double velocity = 0.0;
};

PredictionMatrices expand_prediction(const StateSpaceModel& model, int horizon);

std::vector<TrajectoryPoint> predict(const PredictionMatrices& matrices,
                                     const VehicleState& x0,
                                     std::span<const double> controls);

/// Force at the wheel needed for `acceleration` at `velocity` on `grade` (rad).
double traction_force(const VehicleParams& params, double velocity,
                      double acceleration, double grade);

/// Electrical power drawn from the battery (negative while recuperating).
double battery_power(const VehicleParams& params, double velocity,
                     double traction_force);

/// One kinematic step with the standstill clamp applied. Shared by the
/// planner and the simulator so both produce bit-identical trajectories.
struct KinematicStep {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;  // effective, after the standstill clamp
};

inline KinematicStep advance(double position, double velocity,
                             double acceleration, double dt) {
  double v_next = velocity + acceleration * dt;
  if (v_next < 0.0) v_next = 0.0;
  const double p_next = position + 0.5 * dt * (velocity + v_next);
  return {p_next, v_next, (v_next - velocity) / dt};
}

/// Mean battery power over one step that starts at `velocity`. Sampled at the
/// mid-step speed, so the inertial work matches the change in kinetic energy
/// and an accelerate-then-brake cycle can never gain energy.
double step_battery_power(const VehicleParams& params, double velocity,
                          const KinematicStep& step, double grade);

struct StepResult {
  VehicleState state;
  double applied_acceleration = 0.0;
  double battery_power = 0.0;  // W, mean over the step
  bool saturated = false;
};

/// Advance the vehicle by `dt`. Accelerations outside the traction/brake
/// force envelope are saturated and flagged.
StepResult step_vehicle(const VehicleParams& params, const VehicleState& state,
                        double acceleration, double grade, double dt);

}  // namespace tla

#include "tla/longitudinal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tla {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("vehicle.") + field + ": " + what);
  }
}

}  // namespace

void VehicleParams::validate() const {
  require(std::isfinite(mass) && mass > 0.0, "mass", "must be > 0");
  require(rolling_coeff_c0 >= 0.0, "rolling_coeff_c0", "must be >= 0");
  require(linear_drag_c1 >= 0.0, "linear_drag_c1", "must be >= 0");
  require(aero_drag_c2 >= 0.0, "aero_drag_c2", "must be >= 0");
  require(max_traction_force >= 0.0, "max_traction_force", "must be >= 0");
  require(max_brake_force >= 0.0, "max_brake_force", "must be >= 0");
  require(max_regen_power >= 0.0, "max_regen_power", "must be >= 0");
  require(drive_efficiency > 0.0 && drive_efficiency <= 1.0, "drive_efficiency",
          "must be in (0, 1]");
  require(regen_efficiency > 0.0 && regen_efficiency <= 1.0, "regen_efficiency",
          "must be in (0, 1]");
  require(aux_power >= 0.0, "aux_power", "must be >= 0");
}

StateSpaceModel StateSpaceModel::double_integrator(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  StateSpaceModel m;
  m.A << 1.0, dt, 0.0, 1.0;
  m.B << 0.5 * dt * dt, dt;
  m.C << 0.0, 1.0;
  m.D = 0.0;
  m.dt = dt;
  return m;
}

PredictionMatrices expand_prediction(const StateSpaceModel& model, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  const int np = horizon;
  PredictionMatrices pm;
  pm.horizon = np;
  pm.M = Eigen::MatrixXd::Zero(2 * np, 2);
  pm.N = Eigen::MatrixXd::Zero(2 * np, np);
  pm.E = Eigen::MatrixXd::Zero(np, 2);
  pm.F = Eigen::MatrixXd::Zero(np, np);

  // powers[i] = A^i, built recursively
  std::vector<Eigen::Matrix2d> powers(np + 1);
  powers[0].setIdentity();
  for (int i = 1; i <= np; ++i) powers[i] = model.A * powers[i - 1];

  for (int i = 0; i < np; ++i) {
    pm.M.block<2, 2>(2 * i, 0) = powers[i + 1];
    pm.E.row(i) = model.C * powers[i + 1];
    for (int j = 0; j <= i; ++j) {
      const Eigen::Vector2d blk = powers[i - j] * model.B;
      pm.N.block<2, 1>(2 * i, j) = blk;
      pm.F(i, j) = model.C * blk;
    }
  }
  return pm;
}

std::vector<TrajectoryPoint> predict(const PredictionMatrices& matrices,
                                     const VehicleState& x0,
                                     std::span<const double> controls) {
  const int np = matrices.horizon;
  if (static_cast<int>(controls.size()) != np) {
    throw std::invalid_argument("predict: expected " + std::to_string(np) +
                                " controls, got " + std::to_string(controls.size()));
  }
  const Eigen::Vector2d x(x0.position, x0.velocity);
  const Eigen::Map<const Eigen::VectorXd> u(controls.data(), np);
  const Eigen::VectorXd xp = matrices.M * x + matrices.N * u;

  std::vector<TrajectoryPoint> out(np);
  for (int i = 0; i < np; ++i) out[i] = {xp(2 * i), xp(2 * i + 1)};
  return out;
}

double traction_force(const VehicleParams& p, double velocity, double acceleration,
                      double grade) {
  return p.mass * acceleration + p.rolling_coeff_c0 + p.linear_drag_c1 * velocity +
         p.aero_drag_c2 * velocity * velocity + p.mass * kGravity * std::sin(grade);
}

double battery_power(const VehicleParams& p, double velocity, double force) {
  const double wheel = force * velocity;
  if (wheel >= 0.0) return wheel / p.drive_efficiency + p.aux_power;
  return std::max(wheel * p.regen_efficiency, -p.max_regen_power) + p.aux_power;
}

double step_battery_power(const VehicleParams& params, double velocity,
                          const KinematicStep& step, double grade) {
  const double v_mid = 0.5 * (velocity + step.velocity);
  return battery_power(params, v_mid, traction_force(params, v_mid, step.acceleration, grade));
}

StepResult step_vehicle(const VehicleParams& params, const VehicleState& state,
                        double acceleration, double grade, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_vehicle: dt must be > 0");

  StepResult r;
  const double v = state.velocity;
  const double resist = traction_force(params, v, 0.0, grade);
  const double a_max = (params.max_traction_force - resist) / params.mass;
  const double a_min = (-params.max_brake_force - resist) / params.mass;
  double a = acceleration;
  const double force = traction_force(params, v, a, grade);
  if (force > params.max_traction_force) {
    a = a_max;
    r.saturated = true;
  } else if (force < -params.max_brake_force) {
    a = a_min;
    r.saturated = true;
  }

  const KinematicStep k = advance(state.position, v, a, dt);
  r.applied_acceleration = k.acceleration;
  r.battery_power = step_battery_power(params, v, k, grade);

  r.state.position = k.position;
  r.state.velocity = k.velocity;
  r.state.battery_energy_used = state.battery_energy_used + r.battery_power * dt;
  r.state.time = state.time + dt;
  return r;
}

}  // namespace tla

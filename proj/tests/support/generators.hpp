#pragma once

// Seeded random inputs for the property suites.

#include "tla/ddi.hpp"
#include "tla/longitudinal.hpp"
#include "tla/signal_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tla::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(integer(0, static_cast<int>(items.size()) - 1))];
  }

  VehicleParams vehicle() {
    VehicleParams p;
    p.mass = uniform(800.0, 2500.0);
    p.rolling_coeff_c0 = uniform(0.0, 250.0);
    p.linear_drag_c1 = uniform(0.0, 5.0);
    p.aero_drag_c2 = uniform(0.0, 0.8);
    p.max_traction_force = uniform(2000.0, 8000.0);
    p.max_brake_force = uniform(4000.0, 15000.0);
    p.max_regen_power = uniform(0.0, 80000.0);
    p.drive_efficiency = uniform(0.5, 1.0);
    p.regen_efficiency = uniform(0.5, 1.0);
    p.aux_power = uniform(0.0, 1000.0);
    return p;
  }

  // Up to `max_switches` strictly increasing switch times in (0, t_max).
  PhaseSchedule schedule(double position, double t_max, int max_switches = 6) {
    PhaseSchedule s;
    s.signal_position = position;
    s.initial_phase = chance(0.5) ? Phase::red : Phase::green;
    const int n = integer(0, max_switches);
    double t = 0.0;
    for (int i = 0; i < n; ++i) {
      t += uniform(0.5, t_max / (n + 1));
      s.switch_times.push_back(t);
    }
    s.confidence = uniform(0.0, 1.0);
    return s;
  }

  PedestrianEvent pedestrian(double position) {
    PedestrianEvent e;
    e.crossing_position = position;
    e.start_time = uniform(0.0, 30.0);
    e.walking_speed = uniform(0.5, 2.5);
    e.road_width = uniform(3.0, 14.0);
    e.confidence = uniform(0.0, 1.0);
    return e;
  }

  ddi::IntegrityLevel level() { return static_cast<ddi::IntegrityLevel>(integer(0, 4)); }

  std::string word(const std::vector<std::string>& vocabulary) { return pick(vocabulary); }

 private:
  std::mt19937_64 rng_;
};

inline double relative_error(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

}  // namespace tla::testing

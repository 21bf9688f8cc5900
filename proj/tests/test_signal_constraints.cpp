#include "support/generators.hpp"
#include "tla/signal_constraints.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace tla;
using tla::testing::Gen;

namespace {

PhaseSchedule red_until(double position, double t_green) {
  PhaseSchedule s;
  s.signal_position = position;
  s.initial_phase = Phase::red;
  s.switch_times = {t_green};
  return s;
}

// Walks forward in 1 ms steps until the phase turns green.
double scan_next_green(const PhaseSchedule& s, double t, double give_up) {
  for (long i = 0;; ++i) {
    const double u = t + i * 1e-3;
    if (u > give_up) return kInf;
    if (phase_at(s, u) == Phase::green) return u;
  }
}

bool red_in(const std::vector<TimeInterval>& reds, double t) {
  for (const TimeInterval& r : reds) {
    if (t >= r.start && t < r.end) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("phase_at") {
  const PhaseSchedule s = red_until(100.0, 20.0);
  CHECK(phase_at(s, 10.0) == Phase::red);
  CHECK(phase_at(s, 19.999) == Phase::red);
  CHECK(phase_at(s, 20.0) == Phase::green);
  CHECK(phase_at(s, 1e6) == Phase::green);

  PhaseSchedule always;
  always.initial_phase = Phase::green;
  for (double t : {0.0, 5.0, 1e9}) CHECK(phase_at(always, t) == Phase::green);

  PhaseSchedule cycle;
  cycle.initial_phase = Phase::green;
  cycle.switch_times = {10.0, 40.0, 70.0};
  CHECK(phase_at(cycle, 9.9) == Phase::green);
  CHECK(phase_at(cycle, 10.0) == Phase::red);
  CHECK(phase_at(cycle, 40.0) == Phase::green);
  CHECK(phase_at(cycle, 80.0) == Phase::red);
}

TEST_CASE("next_green_start") {
  const PhaseSchedule s = red_until(100.0, 20.0);
  CHECK(next_green_start(s, 5.0) == 20.0);
  CHECK(next_green_start(s, 25.0) == 25.0);

  PhaseSchedule stuck;
  stuck.initial_phase = Phase::green;
  stuck.switch_times = {3.0};
  CHECK(std::isinf(next_green_start(stuck, 4.0)));

  SUBCASE("matches a fine scan") {
    Gen g(21);
    for (int trial = 0; trial < 300; ++trial) {
      PhaseSchedule r = g.schedule(100.0, 60.0);
      // Switch times on the millisecond grid so the scan can land on them.
      for (double& t : r.switch_times) t = std::round(t * 1000.0) / 1000.0;
      bool increasing = true;
      for (std::size_t i = 1; i < r.switch_times.size(); ++i) {
        increasing = increasing && r.switch_times[i] > r.switch_times[i - 1];
      }
      if (!increasing) continue;
      const double t = std::round(g.uniform(0.0, 70.0) * 1000.0) / 1000.0;
      const double expect = scan_next_green(r, t, 200.0);
      const double got = next_green_start(r, t);
      if (std::isinf(expect)) {
        CHECK(std::isinf(got));
      } else {
        CHECK(std::abs(got - expect) <= 1.5e-3);
      }
    }
  }
}

TEST_CASE("tl_position_bound") {
  const PhaseSchedule s = red_until(250.0, 20.0);
  CHECK(tl_position_bound(s, 0.0, 2.0) == 248.0);
  CHECK(std::isinf(tl_position_bound(s, 20.0, 2.0)));
}

TEST_CASE("interval views partition time") {
  Gen g(22);
  for (int trial = 0; trial < 200; ++trial) {
    const PhaseSchedule s = g.schedule(0.0, 50.0);
    const auto reds = red_intervals(s);
    const auto greens = green_intervals(s);
    for (int i = 0; i < 600; ++i) {
      const double t = i * 0.1;
      CHECK(red_in(reds, t) == (phase_at(s, t) == Phase::red));
      CHECK(red_in(greens, t) == (phase_at(s, t) == Phase::green));
    }
  }
}

TEST_CASE("pedestrian virtual red") {
  PedestrianEvent e;
  e.crossing_position = 250.0;
  e.start_time = 5.0;
  e.road_width = 7.0;
  e.walking_speed = 1.4;
  CHECK(virtual_red_duration(e, 1.0) == doctest::Approx(6.0));
  const PhaseSchedule s = pedestrian_to_virtual_phase(e, 1.0);
  const auto reds = red_intervals(s);
  REQUIRE(reds.size() == 1);
  CHECK(reds[0].start == doctest::Approx(5.0));
  CHECK(reds[0].end == doctest::Approx(11.0));
  CHECK(s.signal_position == 250.0);

  e.walking_speed = 1e9;
  CHECK(virtual_red_duration(e, 1.0) == doctest::Approx(1.0));

  e.start_time = 0.0;
  e.walking_speed = 1.4;
  const PhaseSchedule at_once = pedestrian_to_virtual_phase(e, 1.0);
  CHECK(phase_at(at_once, 0.0) == Phase::red);
  CHECK(phase_at(at_once, 6.0) == Phase::green);

  e.walking_speed = 0.0;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

TEST_CASE("apply_confidence") {
  const ConfidencePolicy policy{5.0};
  PhaseSchedule s = red_until(100.0, 20.0);
  s.confidence = 1.0;
  CHECK(apply_confidence(s, policy) == s);

  s.confidence = 0.0;
  const PhaseSchedule t = apply_confidence(s, policy);
  REQUIRE(t.switch_times.size() == 1);
  CHECK(t.switch_times[0] == doctest::Approx(25.0));

  SUBCASE("red set only grows") {
    Gen g(23);
    for (int trial = 0; trial < 500; ++trial) {
      const PhaseSchedule r = g.schedule(0.0, 60.0);
      const ConfidencePolicy pol{g.uniform(0.0, 10.0)};
      const PhaseSchedule tight = apply_confidence(r, pol);
      CHECK_NOTHROW(tight.validate());
      for (int i = 0; i < 800; ++i) {
        const double time = i * 0.1;
        if (phase_at(r, time) == Phase::red) CHECK(phase_at(tight, time) == Phase::red);
      }
    }
  }
}

TEST_CASE("preceding_vehicle_bound") {
  const std::vector<double> parked(8, 250.0);
  for (double b : preceding_vehicle_bound(parked, 10.0)) CHECK(b == 240.0);
  const std::vector<double> moving{1.0, 2.0, 3.5};
  CHECK(preceding_vehicle_bound(moving, 0.0) == moving);
  const std::vector<double> reversing{5.0, 4.0};
  CHECK_THROWS_AS(preceding_vehicle_bound(reversing, 1.0), std::invalid_argument);
}

TEST_CASE("merge_constraints") {
  const std::vector<double> limits(10, 13.89);

  SUBCASE("single source is the identity") {
    const std::vector<double> b{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const ConstraintProfile c = merge_constraints({b}, limits, 0.5);
    CHECK(c.upper_position_bound == b);
    CHECK(c.upper_velocity_bound == limits);
    CHECK(c.horizon == 10);
  }

  SUBCASE("signal and pedestrian") {
    const std::vector<double> tl(10, 248.0);
    std::vector<double> ped(10, kInf);
    for (int k = 3; k <= 6; ++k) ped[k] = 230.0;
    const ConstraintProfile c = merge_constraints({tl, ped}, limits, 0.5);
    for (int k = 0; k < 10; ++k) {
      CHECK(c.upper_position_bound[k] == ((k >= 3 && k <= 6) ? 230.0 : 248.0));
    }
  }

  SUBCASE("pointwise minimum") {
    Gen g(24);
    for (int trial = 0; trial < 200; ++trial) {
      const int np = g.integer(1, 40);
      const int n = g.integer(1, 5);
      std::vector<std::vector<double>> profiles(n, std::vector<double>(np));
      for (auto& p : profiles) {
        for (double& x : p) x = g.chance(0.2) ? kInf : g.uniform(0.0, 500.0);
      }
      const std::vector<double> lim(np, 10.0);
      const ConstraintProfile c = merge_constraints(profiles, lim, 0.5);
      for (int k = 0; k < np; ++k) {
        double lo = kInf;
        for (int i = 0; i < n; ++i) lo = profiles[i][k] < lo ? profiles[i][k] : lo;
        CHECK(c.upper_position_bound[k] == lo);
      }
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(merge_constraints(std::vector<std::vector<double>>{}, {}, 0.5),
                    std::invalid_argument);
    const std::vector<double> shorter(3, 1.0);
    CHECK_THROWS_AS(merge_constraints({shorter}, limits, 0.5), std::invalid_argument);
  }
}

TEST_CASE("passable sources") {
  const std::vector<double> limits(2, 20.0);
  std::vector<BoundSource> src;
  src.push_back({"signal", {100.0, 100.0}, true});
  src.push_back({"vehicle", {kInf, 150.0}, false});
  ConstraintProfile c = merge_constraints(src, limits, 0.5);

  CHECK(c.admits(0, 95.0, 99.0));
  CHECK_FALSE(c.admits(0, 99.0, 101.0));
  CHECK(c.admits(0, 100.5, 104.0));  // already past the line
  CHECK_FALSE(c.admits(1, 140.0, 151.0));

  flag_infeasibility(c, 120.0);
  CHECK_FALSE(c.infeasible);
  flag_infeasibility(c, 160.0);
  CHECK_FALSE(c.infeasible);  // the vehicle bound is infinite at step 0

  std::vector<BoundSource> close;
  close.push_back({"vehicle", {50.0, 50.0}, false});
  ConstraintProfile d = merge_constraints(close, limits, 0.5);
  flag_infeasibility(d, 60.0);
  CHECK(d.infeasible);
}

TEST_CASE("schedule validation") {
  PhaseSchedule s;
  s.switch_times = {5.0, 5.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.switch_times = {5.0, 6.0};
  s.confidence = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

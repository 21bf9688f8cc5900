#include "support/generators.hpp"
#include "tla/reference.hpp"

#include <doctest.h>

#include <algorithm>
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

ReferenceTrajectory reference_for(const std::vector<PhaseSchedule>& schedules, int horizon,
                                  double limit = 13.89) {
  ReferenceRequest req;
  req.ego_position = 0.0;
  req.legal_limit = limit;
  req.schedules = schedules;
  req.horizon = horizon;
  req.dt = 0.5;
  return build_reference(req);
}

}  // namespace

TEST_CASE("construction speed") {
  SUBCASE("saturated by the legal limit") {
    const std::vector<PhaseSchedule> s{red_until(200.0, 10.0)};
    CHECK(reference_for(s, 10).construction_speed == doctest::Approx(13.89));
  }
  SUBCASE("slowed to reach the green") {
    const std::vector<PhaseSchedule> s{red_until(200.0, 20.0)};
    CHECK(reference_for(s, 10).construction_speed == doctest::Approx(10.0));
  }
  SUBCASE("already green") {
    PhaseSchedule g;
    g.signal_position = 200.0;
    const std::vector<PhaseSchedule> s{g};
    CHECK(reference_for(s, 10).construction_speed == doctest::Approx(13.89));
  }
  SUBCASE("positions at constant speed") {
    const std::vector<PhaseSchedule> s{red_until(100.0, 10.0)};
    const ReferenceTrajectory r = reference_for(s, 20);
    CHECK(r.construction_speed == doctest::Approx(10.0));
    for (int k = 0; k < 20; ++k) CHECK(r.positions[k] == doctest::Approx(10.0 * (k + 1) * 0.5));
    CHECK(r.terminal_position == r.positions.back());
  }
  SUBCASE("signals behind are ignored") {
    std::vector<PhaseSchedule> s{red_until(-5.0, 100.0)};
    CHECK(reference_for(s, 4).construction_speed == doctest::Approx(13.89));
  }
}

TEST_CASE("red that never ends pins the reference at the stop line") {
  PhaseSchedule s;
  s.signal_position = 30.0;
  s.initial_phase = Phase::red;
  const std::vector<PhaseSchedule> list{s};
  const ReferenceTrajectory r = reference_for(list, 20);
  CHECK(r.positions.back() == doctest::Approx(28.0));
  CHECK(*std::max_element(r.positions.begin(), r.positions.end()) <= 28.0 + 1e-12);
}

TEST_CASE("preceding bound saturates the reference") {
  const std::vector<double> bound(6, 3.0);
  ReferenceRequest req;
  req.legal_limit = 10.0;
  req.horizon = 6;
  req.dt = 0.5;
  req.preceding_bound = std::span<const double>(bound);
  const ReferenceTrajectory r = build_reference(req);
  CHECK(r.positions[0] == doctest::Approx(3.0));
  for (double p : r.positions) CHECK(p <= 3.0);

  const std::vector<double> wrong(3, 0.0);
  req.preceding_bound = std::span<const double>(wrong);
  CHECK_THROWS_AS(build_reference(req), std::invalid_argument);
}

TEST_CASE("reference invariants") {
  Gen g(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<PhaseSchedule> list;
    const int n = g.integer(0, 3);
    for (int i = 0; i < n; ++i) list.push_back(g.schedule(g.uniform(-20.0, 400.0), 80.0));
    ReferenceRequest req;
    req.ego_position = g.uniform(0.0, 50.0);
    req.legal_limit = g.uniform(5.0, 30.0);
    req.schedules = list;
    req.t_now = g.uniform(0.0, 40.0);
    req.horizon = g.integer(1, 60);
    req.dt = g.uniform(0.1, 1.0);
    const ReferenceTrajectory r = build_reference(req);
    REQUIRE(r.positions.size() == static_cast<std::size_t>(req.horizon));
    double prev = req.ego_position;
    for (double p : r.positions) {
      CHECK(p >= prev - 1e-9);
      CHECK(p - prev <= req.legal_limit * req.dt + 1e-9);
      prev = p;
    }
  }
}

TEST_CASE("lateness_penalty") {
  ReferenceTrajectory r;
  r.dt = 0.5;
  r.positions = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  CHECK(lateness_penalty(r.positions, r, 1.0) == 0.0);

  std::vector<double> ahead = r.positions;
  for (double& p : ahead) p += 3.0;
  CHECK(lateness_penalty(ahead, r, 1.0) == 0.0);

  std::vector<double> behind = r.positions;
  for (int k : {1, 4, 6, 9}) behind[k] -= 5.0;
  CHECK(lateness_penalty(behind, r, 1.0) == doctest::Approx(20.0));

  const std::vector<double> shorter(3, 0.0);
  CHECK_THROWS_AS(lateness_penalty(shorter, r, 1.0), std::invalid_argument);

  SUBCASE("delaying never lowers the penalty") {
    Gen g(32);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> actual(r.positions.size());
      for (double& a : actual) a = g.uniform(0.0, 110.0);
      std::vector<double> later = actual;
      const double shift = g.uniform(0.0, 20.0);
      for (double& a : later) a -= shift;
      CHECK(lateness_penalty(later, r, 0.7) >= lateness_penalty(actual, r, 0.7));
    }
  }
}

TEST_CASE("terminal_cost") {
  CHECK(terminal_cost(100.0, 100.0, 2.0) == 0.0);
  CHECK(terminal_cost(90.0, 100.0, 2.0) == doctest::Approx(20.0));
  CHECK(terminal_cost(120.0, 100.0, 2.0) == 0.0);
}

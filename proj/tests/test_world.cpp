#include "support/generators.hpp"
#include "tla/world.hpp"

#include <doctest.h>

#include <memory>
#include <stdexcept>
#include <vector>

using namespace tla;
using tla::testing::Gen;

namespace {

WorldState crossing_world(double ego_position) {
  WorldState w;
  w.ego.position = ego_position;
  w.ego.velocity = 10.0;
  w.route.pieces.push_back({0.0, 500.0, 0.0, 13.89});
  PedestrianEvent e;
  e.crossing_position = 250.0;
  e.start_time = 0.0;
  e.confidence = 0.9;
  w.pedestrians.push_back(e);
  return w;
}

std::shared_ptr<const ddi::DdiContract> empty_contract() {
  auto c = std::make_shared<ddi::DdiContract>();
  c->component_name = "test";
  return c;
}

}  // namespace

TEST_CASE("route") {
  Route r;
  r.pieces = {{0.0, 100.0, 0.0, 13.89}, {100.0, 250.0, 0.03, 8.33}, {250.0, 400.0, 0.0, 13.89}};
  CHECK_NOTHROW(r.validate());
  CHECK(r.length() == 400.0);
  CHECK(r.legal_limit_at(50.0) == 13.89);
  CHECK(r.legal_limit_at(100.0) == 8.33);
  CHECK(r.grade_at(120.0) == 0.03);
  CHECK(r.legal_limit_at(1000.0) == 13.89);
  CHECK(r.min_limit(0.0, 99.0) == 13.89);
  CHECK(r.min_limit(0.0, 100.0) == 8.33);
  CHECK(r.min_limit(260.0, 390.0) == 13.89);

  Route gap = r;
  gap.pieces[1].start = 101.0;
  CHECK_THROWS_AS(gap.validate(), std::invalid_argument);
  Route empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("scripted vehicle") {
  const auto s = ScriptedVehicle::from_segments(
      100.0, 0.0, {{2.0, 0.0}, {2.0, 1.0}, {1.0, 0.0}}, 0.5);
  CHECK(s.position_at(0) == 100.0);
  CHECK(s.position_at(4) == 100.0);
  CHECK(s.velocity_at(8) == doctest::Approx(2.0));
  CHECK(s.position_at(8) == doctest::Approx(102.0));
  CHECK(s.position_at(10) == doctest::Approx(104.0));
  CHECK(s.position_at(1000) == s.position_at(10));

  SUBCASE("positions never decrease") {
    Gen g(51);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<ScriptSegment> segs;
      for (int i = g.integer(0, 6); i > 0; --i) {
        segs.push_back({g.uniform(0.0, 10.0), g.uniform(-3.0, 2.0)});
      }
      const auto v = ScriptedVehicle::from_segments(g.uniform(0.0, 300.0),
                                                    g.uniform(0.0, 15.0), segs, 0.5);
      for (std::size_t i = 1; i < v.positions.size(); ++i) {
        CHECK(v.positions[i] >= v.positions[i - 1]);
        CHECK(v.velocities[i] >= 0.0);
      }
    }
  }
}

TEST_CASE("camera range gate") {
  const SensorConfig sensors;  // 50 m camera
  CHECK(observe(crossing_world(0.0), sensors, {}).schedules.empty());
  const Observation o = observe(crossing_world(210.0), sensors, {});
  REQUIRE(o.schedules.size() == 1);
  CHECK(o.schedules[0].pedestrian);
  CHECK(o.schedules[0].source == Source::camera);
  CHECK(phase_at(o.schedules[0].schedule, 0.0) == Phase::red);
}

TEST_CASE("a crossing that has cleared is not reported") {
  WorldState w = crossing_world(210.0);
  w.time = 100.0;
  CHECK(observe(w, SensorConfig{}, {}).schedules.empty());
}

TEST_CASE("camera and V2X reports of one crossing merge") {
  const WorldState w = crossing_world(210.0);
  V2xMessage m;
  m.kind = MessageKind::pedestrian_occupancy;
  m.sender_position = 248.0;
  m.payload = OccupancyPayload{250.2, 6.0, 0.7};
  const Observation o = observe(w, SensorConfig{}, {m});
  REQUIRE(o.schedules.size() == 1);
  CHECK(o.schedules[0].schedule.confidence == 1.0);
  CHECK(o.schedules[0].pedestrian);

  const Observation far = observe(crossing_world(0.0), SensorConfig{}, {m});
  REQUIRE(far.schedules.size() == 1);
  CHECK(far.schedules[0].source == Source::v2x);
  CHECK(far.schedules[0].schedule.confidence == 0.7);
  CHECK(phase_at(far.schedules[0].schedule, 5.9) == Phase::red);
  CHECK(phase_at(far.schedules[0].schedule, 6.0) == Phase::green);
}

TEST_CASE("signal merge keeps V2X timing unless phases disagree") {
  WorldState w;
  w.ego.position = 80.0;
  w.route.pieces.push_back({0.0, 500.0, 0.0, 13.89});
  PhaseSchedule truth;
  truth.signal_position = 100.0;
  truth.initial_phase = Phase::red;
  truth.switch_times = {10.0};
  w.signals.push_back(truth);

  V2xMessage m;
  m.kind = MessageKind::spat;
  m.sender_position = 100.0;
  PhaseSchedule told = truth;
  told.confidence = 0.8;
  m.payload = told;
  Observation o = observe(w, SensorConfig{}, {m});
  REQUIRE(o.schedules.size() == 1);
  CHECK(o.schedules[0].schedule.switch_times == truth.switch_times);
  CHECK(o.schedules[0].schedule.confidence == 1.0);
  CHECK(o.conflicts == 0);

  told.initial_phase = Phase::green;
  m.payload = told;
  o = observe(w, SensorConfig{}, {m});
  REQUIRE(o.schedules.size() == 1);
  CHECK(o.schedules[0].conflict);
  CHECK(o.schedules[0].source == Source::camera);
  CHECK(o.schedules[0].schedule.switch_times.empty());
  CHECK(o.conflicts == 1);
}

TEST_CASE("preceding vehicle tracking") {
  WorldState w = crossing_world(0.0);
  w.preceding = ScriptedVehicle::from_segments(248.0, 0.0, {{10.0, 0.0}}, 0.5);
  CHECK_FALSE(observe(w, SensorConfig{}, {}).preceding);

  w.ego.position = 210.0;
  const Observation seen = observe(w, SensorConfig{}, {});
  REQUIRE(seen.preceding);
  CHECK(seen.preceding->position == 248.0);
  CHECK_FALSE(seen.preceding->hold_until);

  // Out of camera range, the vehicle's own occupancy report places it.
  w.ego.position = 100.0;
  V2xMessage m;
  m.kind = MessageKind::pedestrian_occupancy;
  m.sender_position = 248.0;
  m.payload = OccupancyPayload{250.0, 6.0, 0.9};
  const Observation told = observe(w, SensorConfig{}, {m});
  REQUIRE(told.preceding);
  CHECK(told.preceding->position == 248.0);
  REQUIRE(told.preceding->hold_until);
  CHECK(*told.preceding->hold_until == 6.0);
  CHECK(told.preceding->hold_confidence == 0.9);
}

TEST_CASE("broadcast range and cooperation") {
  WorldState w = crossing_world(0.0);
  w.preceding = ScriptedVehicle::from_segments(240.0, 0.0, {}, 0.5);
  w.v2x.occupancy_contract = empty_contract();
  const SensorConfig sensors;  // 200 m V2V
  CHECK(broadcast(w, sensors).empty());  // 240 m away

  w.ego.position = 180.0;
  const auto near = broadcast(w, sensors);
  REQUIRE(near.size() == 1);
  CHECK(near[0].kind == MessageKind::pedestrian_occupancy);
  const auto& occ = std::get<OccupancyPayload>(near[0].payload);
  CHECK(occ.crossing_position == 250.0);
  CHECK(occ.estimated_clear_time == doctest::Approx(6.0));
  CHECK_NOTHROW(near[0].validate());

  w.v2x.advised_speed = 8.0;
  CHECK(broadcast(w, sensors).size() == 2);

  w.v2x.cooperation = false;
  CHECK(broadcast(w, sensors).empty());
}

TEST_CASE("message drops are deterministic") {
  WorldState w;
  w.ego.position = 0.0;
  w.route.pieces.push_back({0.0, 500.0, 0.0, 13.89});
  for (int i = 0; i < 20; ++i) {
    PhaseSchedule s;
    s.signal_position = 10.0 * i;
    w.signals.push_back(s);
  }
  w.v2x.drop_probability = 0.5;
  w.v2x.seed = 7;
  const auto a = broadcast(w, SensorConfig{});
  const auto b = broadcast(w, SensorConfig{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].sender == b[i].sender);
  CHECK(a.size() > 0);
  CHECK(a.size() < 20);

  w.v2x.drop_probability = 1.0;
  CHECK(broadcast(w, SensorConfig{}).empty());
}

TEST_CASE("step_world advances time") {
  WorldState w = crossing_world(0.0);
  for (int i = 0; i < 100; ++i) w = step_world(w, 0.0, 0.5);
  CHECK(w.time == doctest::Approx(50.0));
  CHECK(w.step == 100);
  CHECK(w.ego.position > 0.0);
  CHECK_THROWS_AS(step_world(w, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("sensor validation") {
  SensorConfig s;
  s.camera_range = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

#include "tla/scenario.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <string>

using namespace tla;
using json = nlohmann::json;

namespace {

const std::string kDir = std::string(TLA_SOURCE_DIR) + "/scenarios";

std::string minimal() {
  return R"({
    "schema_version": 1,
    "name": "tiny",
    "end": {"position": 100.0},
    "initial": {"position": 0.0, "velocity": 10.0},
    "route": [{"start": 0.0, "end": 200.0, "grade": 0.0, "legal_limit": 13.9}]
  })";
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text, kDir);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

std::string patched(const char* pointer, json value) {
  json j = json::parse(minimal());
  j[json::json_pointer(pointer)] = std::move(value);
  return j.dump();
}

}  // namespace

TEST_CASE("bundled cooperative scenario") {
  const Scenario s = load_scenario(kDir + "/crosswalk_cooperative.json");
  REQUIRE(s.pedestrians.size() == 1);
  CHECK(s.pedestrians[0].crossing_position == 250.0);
  CHECK(s.initial_velocity == doctest::Approx(50.0 / 3.6));
  CHECK(s.sensors.camera_range == 50.0);
  CHECK(s.sensors.v2v_range == 200.0);
  REQUIRE(s.end_position);
  CHECK(*s.end_position == 400.0);
  CHECK(s.cooperation);
  CHECK(s.occupancy_contract);
  CHECK_FALSE(s.occupancy_contract->xml.empty());

  const Scenario camera = load_scenario(kDir + "/crosswalk_camera_only.json");
  CHECK_FALSE(camera.cooperation);
}

TEST_CASE("defaults and round trip") {
  const Scenario s = parse_scenario(minimal(), kDir);
  CHECK(s.vehicle == VehicleParams{});
  CHECK(s.mpc == MpcConfig{});
  CHECK(s.max_duration == 300.0);
  CHECK(parse_scenario(save_scenario(s), kDir) == s);

  for (const char* name : {"crosswalk_cooperative.json", "crosswalk_camera_only.json",
                           "empty_road.json", "signal_spat.json"}) {
    const Scenario b = load_scenario(kDir + "/" + name);
    CHECK(parse_scenario(save_scenario(b), kDir) == b);
  }
}

TEST_CASE("validation names the field") {
  CHECK(error_of(patched("/vehicle", json{{"mass", -5.0}})).find("vehicle.mass") !=
        std::string::npos);
  CHECK(error_of(patched("/bogus", 1)).find("bogus") != std::string::npos);
  CHECK(error_of(patched("/route/0/end", "far")).find("route[0].end") != std::string::npos);
  CHECK(error_of(patched("/schema_version", 99)).find("schema_version") != std::string::npos);
  CHECK(error_of(patched("/end/position", 500.0)).find("end") != std::string::npos);
  CHECK(error_of(patched("/pedestrians",
                         json::array({{{"crossing_position", 900.0}, {"start_time", 1.0}}})))
            .find("pedestrians[0]") != std::string::npos);
  CHECK(error_of(patched("/mpc", json{{"objective", "fastest"}})).find("mpc.objective") !=
        std::string::npos);
  CHECK(error_of("{not json").size() > 0);

  json no_end = json::parse(minimal());
  no_end.erase("end");
  CHECK(error_of(no_end.dump()).find("end") != std::string::npos);
}

TEST_CASE("contracts resolve relative to the scenario") {
  json j = json::parse(minimal());
  j["ddi"] = {{"contracts", {{"spat", {{"file", "contracts/spat_service.xml"}}}}}};
  const Scenario s = parse_scenario(j.dump(), kDir);
  REQUIRE(s.spat_contract);
  CHECK(s.spat_contract->xml.find("<DDI>") != std::string::npos);
  const WorldState w = initial_world(s);
  REQUIRE(w.v2x.spat_contract);
  CHECK_FALSE(w.v2x.spat_contract->guarantee.demands.empty());

  j["ddi"]["contracts"]["spat"]["file"] = "contracts/missing.xml";
  CHECK(error_of(j.dump()).find("ddi.contracts.spat") != std::string::npos);
  j["ddi"]["contracts"]["spat"] = {{"xml", "<DDI>"}};
  CHECK_FALSE(error_of(j.dump()).empty());
}

TEST_CASE("initial world") {
  const Scenario s = load_scenario(kDir + "/crosswalk_cooperative.json");
  const WorldState w = initial_world(s);
  CHECK(w.time == 0.0);
  CHECK(w.ego.position == s.initial_position);
  CHECK(w.ego.velocity == s.initial_velocity);
  REQUIRE(w.preceding);
  CHECK(w.preceding->position_at(0) == s.preceding->position);
  CHECK(w.v2x.cooperation);
}

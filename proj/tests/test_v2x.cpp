#include "tla/v2x.hpp"

#include <doctest.h>

#include <memory>
#include <stdexcept>

using namespace tla;

namespace {

std::shared_ptr<const ddi::DdiContract> demanding(const char* name, ddi::IntegrityLevel level) {
  auto c = std::make_shared<ddi::DdiContract>();
  c->component_name = "sender";
  c->guarantee.configuration_name = "service";
  ddi::Demand d;
  d.name = name;
  d.integrity_level = level;
  c->guarantee.demands.push_back(d);
  return c;
}

}  // namespace

TEST_CASE("payload must match the kind") {
  V2xMessage m;
  m.kind = MessageKind::spat;
  m.payload = PhaseSchedule{};
  CHECK_NOTHROW(m.validate());
  m.kind = MessageKind::speed_advice;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.payload = 8.0;
  CHECK_NOTHROW(m.validate());
  m.kind = MessageKind::pedestrian_occupancy;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  CHECK(std::string(to_string(MessageKind::pedestrian_occupancy)) == "PedestrianOccupancy");
}

TEST_CASE("gate") {
  ddi::CapabilitySet caps;
  caps.offered.push_back({"time synchronisation", ddi::IntegrityLevel::D});
  caps.offered.push_back({"acceleration", ddi::IntegrityLevel::B});

  V2xMessage spat;
  spat.kind = MessageKind::spat;
  spat.payload = PhaseSchedule{};
  spat.ddi = demanding("time synchronisation", ddi::IntegrityLevel::B);
  CHECK(gate_message(spat, caps).pass);

  V2xMessage advice;
  advice.kind = MessageKind::speed_advice;
  advice.payload = 8.0;
  advice.ddi = demanding("acceleration", ddi::IntegrityLevel::D);
  const GateDecision d = gate_message(advice, caps);
  CHECK_FALSE(d.pass);
  REQUIRE(d.unmet.size() == 1);
  CHECK(d.reason.find("acceleration") != std::string::npos);

  V2xMessage bare = spat;
  bare.ddi = nullptr;
  CHECK_FALSE(gate_message(bare, caps, GateMode::strict).pass);
  CHECK(gate_message(bare, caps, GateMode::strict).reason == "no contract");
  CHECK(gate_message(bare, caps, GateMode::permissive).pass);
}

#pragma once

#include "tla/ddi.hpp"
#include "tla/signal_constraints.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tla {

enum class MessageKind { spat, pedestrian_occupancy, speed_advice };

const char* to_string(MessageKind kind);

struct OccupancyPayload {
  double crossing_position = 0.0;     // m
  double estimated_clear_time = 0.0;  // s, absolute
  double confidence = 1.0;
  bool operator==(const OccupancyPayload&) const = default;
};

/// Payload alternatives follow MessageKind: SPaT carries a PhaseSchedule,
/// occupancy an OccupancyPayload, speed advice the advised speed in m/s.
using MessagePayload = std::variant<PhaseSchedule, OccupancyPayload, double>;

struct V2xMessage {
  MessageKind kind = MessageKind::spat;
  std::string sender;
  double sender_position = 0.0;  // m
  double sender_velocity = 0.0;  // m/s, 0 for fixed infrastructure
  MessagePayload payload;
  std::shared_ptr<const ddi::DdiContract> ddi;  // null when the sender attaches none
  double timestamp = 0.0;                       // emission time, s

  /// Throws std::invalid_argument when the payload does not match the kind.
  void validate() const;
};

enum class GateMode { strict, permissive };

struct GateDecision {
  bool pass = false;
  std::string reason;  // empty on pass
  std::vector<ddi::Demand> unmet;
};

/// Accepts a message iff its contract is satisfied by the capabilities.
/// Contract-less messages are dropped in strict mode and passed otherwise.
GateDecision gate_message(const V2xMessage& message, const ddi::CapabilitySet& capabilities,
                          GateMode mode = GateMode::strict);

}  // namespace tla

#include "tla/v2x.hpp"

#include <stdexcept>

namespace tla {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::spat: return "SPaT";
    case MessageKind::pedestrian_occupancy: return "PedestrianOccupancy";
    case MessageKind::speed_advice: return "SpeedAdvice";
  }
  return "?";
}

void V2xMessage::validate() const {
  const bool ok = (kind == MessageKind::spat && std::holds_alternative<PhaseSchedule>(payload)) ||
                  (kind == MessageKind::pedestrian_occupancy &&
                   std::holds_alternative<OccupancyPayload>(payload)) ||
                  (kind == MessageKind::speed_advice && std::holds_alternative<double>(payload));
  if (!ok) throw std::invalid_argument(std::string("V2xMessage: payload does not match kind ") + to_string(kind));
}

GateDecision gate_message(const V2xMessage& message, const ddi::CapabilitySet& capabilities,
                          GateMode mode) {
  GateDecision d;
  if (!message.ddi) {
    d.pass = mode == GateMode::permissive;
    if (!d.pass) d.reason = "no contract";
    return d;
  }
  ddi::Evaluation e = ddi::evaluate(*message.ddi, capabilities);
  d.pass = e.accepted;
  if (!d.pass) {
    d.reason = "unmet demands:";
    for (const auto& u : e.unmet) {
      d.reason += " ";
      d.reason += u.name;
      d.reason += "@";
      d.reason += ddi::to_string(u.integrity_level);
    }
    d.unmet = std::move(e.unmet);
  }
  return d;
}

}  // namespace tla

#pragma once

#include "tla/ddi.hpp"
#include "tla/longitudinal.hpp"
#include "tla/mpc.hpp"
#include "tla/signal_constraints.hpp"
#include "tla/v2x.hpp"
#include "tla/world.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tla {

inline constexpr int kScenarioSchemaVersion = 1;

/// Invalid scenario content. The message starts with the offending field path.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A DDI contract either inline or read from a file next to the scenario.
struct ContractRef {
  std::string file;  // as written in the scenario, may be empty
  std::string xml;   // document text, loaded from `file` when given
  bool operator==(const ContractRef&) const = default;
};

struct PrecedingSpec {
  double position = 0.0;
  double velocity = 0.0;
  std::vector<ScriptSegment> segments;
  bool operator==(const PrecedingSpec&) const = default;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  std::optional<double> end_position;  // m
  double max_duration = 300.0;         // s
  VehicleParams vehicle;
  double initial_position = 0.0;
  double initial_velocity = 0.0;
  Route route;
  std::vector<PhaseSchedule> signals;
  std::vector<PedestrianEvent> pedestrians;
  std::optional<PrecedingSpec> preceding;
  SensorConfig sensors;
  MpcConfig mpc;
  CostWeights weights;
  ConfidencePolicy confidence;

  bool cooperation = true;
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
  double pedestrian_safety_margin = 1.0;  // s
  std::optional<double> advised_speed;    // m/s
  double advice_decel = 1.0;              // m/s^2
  double departure_accel = 1.0;           // m/s^2, assumed for a waiting preceding vehicle

  GateMode gate_mode = GateMode::strict;
  ddi::CapabilitySet capabilities;
  std::optional<ContractRef> spat_contract;
  std::optional<ContractRef> occupancy_contract;
  std::optional<ContractRef> advice_contract;

  /// Throws ScenarioError naming the field.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

Scenario load_scenario(const std::filesystem::path& path);
/// `base_dir` resolves contract file references.
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir);
std::string save_scenario(const Scenario& scenario);

/// World at t = 0 and the parsed contracts attached to it.
WorldState initial_world(const Scenario& scenario);

}  // namespace tla

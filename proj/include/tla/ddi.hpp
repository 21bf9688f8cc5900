#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tla::ddi {

enum class IntegrityLevel { QM = 0, A = 1, B = 2, C = 3, D = 4 };

IntegrityLevel parse_integrity_level(std::string_view token);  // throws SchemaError
const char* to_string(IntegrityLevel level);

/// Structurally valid XML that does not follow the contract dialect.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& message, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class DemandKind { configuration, platform_service, health_monitoring };

const char* to_string(DemandKind kind);

struct Demand {
  DemandKind kind = DemandKind::configuration;
  // configuration: ConfigurationName; platform_service: Failure;
  // health_monitoring: Application.
  std::string name;
  IntegrityLevel integrity_level = IntegrityLevel::QM;

  // platform_service
  std::string reaction;
  std::string error_text;  // as written, e.g. "3 %"
  double error_percent = 0.0;

  // health_monitoring
  std::string resource;
  std::string latency_text;  // as written, e.g. "more than 10 ms"
  double latency_ms = 0.0;

  bool operator==(const Demand&) const = default;
};

struct Guarantee {
  std::string configuration_name;
  IntegrityLevel integrity_level = IntegrityLevel::QM;
  int security_property = 0;  // preserved, not evaluated
  std::vector<Demand> demands;

  bool operator==(const Guarantee&) const = default;
};

struct DdiContract {
  std::string component_name;
  Guarantee guarantee;

  bool operator==(const DdiContract&) const = default;
};

struct OfferedConfiguration {
  std::string name;
  IntegrityLevel integrity_level = IntegrityLevel::QM;
  bool operator==(const OfferedConfiguration&) const = default;
};

struct PlatformReaction {
  std::string failure;
  std::string reaction;
  IntegrityLevel integrity_level = IntegrityLevel::QM;
  double max_error_percent = 0.0;
  bool operator==(const PlatformReaction&) const = default;
};

struct HealthMonitor {
  std::string application;
  std::string resource;
  double detection_threshold_ms = 0.0;  // flags latencies above this
  IntegrityLevel integrity_level = IntegrityLevel::QM;
  bool operator==(const HealthMonitor&) const = default;
};

struct CapabilitySet {
  std::vector<OfferedConfiguration> offered;
  std::vector<PlatformReaction> platform_reactions;
  std::vector<HealthMonitor> health_monitors;

  /// Names must be unique within each category.
  void validate() const;
  bool operator==(const CapabilitySet&) const = default;
};

/// Throws xml::ParseError for malformed XML and SchemaError for a document
/// that is well formed but not a valid contract.
DdiContract parse_ddi(std::string_view document);

std::string serialize(const DdiContract& contract);

struct Evaluation {
  bool accepted = true;
  std::vector<Demand> unmet;  // non-empty iff rejected
};

bool satisfies(const Demand& demand, const CapabilitySet& capabilities);
Evaluation evaluate(const DdiContract& contract, const CapabilitySet& capabilities);

}  // namespace tla::ddi

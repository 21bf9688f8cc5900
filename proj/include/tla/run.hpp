#pragma once

#include "tla/scenario.hpp"
#include "tla/world.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace tla {

/// Thrown when the simulated ego ends a step beyond the bound that applied to it.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One CSV row. Row 0 is the initial state; row i > 0 is the state after
/// step i together with what produced it: the applied acceleration, the mean
/// battery power over the step, and the bound and reference that applied to
/// the new state.
struct LogRow {
  double time = 0.0;
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double battery_power = 0.0;
  double energy = 0.0;  // cumulative battery energy, J
  double position_bound = kInf;
  double reference_position = 0.0;
  bool feasible = true;
  int accepted = 0;
  int dropped = 0;
};

inline constexpr const char* kCsvHeader =
    "time,position,velocity,acceleration,battery_power,energy,position_bound,"
    "reference_position,feasible,accepted,dropped";

struct RunSummary {
  std::string scenario;
  double total_energy = 0.0;  // J
  double min_velocity = 0.0;  // m/s
  int stop_count = 0;
  double travel_time = 0.0;  // s
  int constraint_violations = 0;
  int infeasible_replans = 0;
  int replans = 0;
  int accepted_messages = 0;
  int dropped_messages = 0;
  int conflicts = 0;
  bool reached_end = false;
  double final_position = 0.0;
  std::optional<double> end_position;
  Route route;
};

struct RunOptions {
  bool verbose = false;            // fills replan and message logs
  bool abort_on_violation = true;  // otherwise violations are only counted
};

struct RunResult {
  RunSummary summary;
  std::vector<LogRow> rows;
  std::vector<std::string> replans;   // CSV lines, verbose only
  std::vector<std::string> messages;  // JSON lines, verbose only
};

RunResult run(const Scenario& scenario, const RunOptions& options = {});

std::string format_csv(const std::vector<LogRow>& rows);
std::vector<LogRow> parse_csv(const std::string& text);

std::string summary_to_json(const RunSummary& summary, const Scenario* scenario = nullptr);
RunSummary summary_from_json(const std::string& text);

struct Comparison {
  double energy_delta_percent = 0.0;  // (E_a - E_b) / E_a * 100, a is the baseline
  int stop_delta = 0;                 // b - a
  double time_delta = 0.0;            // b - a, s
};

/// Throws std::invalid_argument when the runs cover different routes or ends.
Comparison compare(const RunSummary& baseline, const RunSummary& candidate);
std::string comparison_to_json(const Comparison& c, const RunSummary& a, const RunSummary& b);

}  // namespace tla

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ooe/model.hpp"
#include "ooe/monitor.hpp"
#include "ooe/trace.hpp"

namespace ooe {

enum class Assignment { ImportanceMonotonic, Explicit };

struct Policy {
  Assignment assignment = Assignment::ImportanceMonotonic;
  FaultPolicy fault_policy = FaultPolicy::Permanent;
  bool ipl_optimization = false;
  bool mask_until_bottom_half = false;
  Tick delta_th = 0;
};

struct Periodic {
  Tick offset = 0;
  Tick period = 1;
};

// After min_sep ticks since the last raise, each tick raises with
// probability `density`.
struct Sporadic {
  Tick min_sep = 1;
  double density = 1.0;
  std::optional<std::uint64_t> seed;
};

struct Burst {
  Tick at = 0;
  std::uint32_t count = 1;
  Tick spacing = 0;
};

// round(rate * duration) raises spread evenly over [start, start + duration).
// duration defaults to the rest of the horizon.
struct Storm {
  Tick start = 0;
  double rate = 1.0;
  std::optional<Tick> duration;
};

struct Explicit {
  std::vector<Tick> times;
};

struct WorkloadSpec {
  LineId line;
  std::variant<Periodic, Sporadic, Burst, Storm, Explicit> kind;
};

struct Scenario {
  TaskSet tasks;
  Policy policy;
  std::vector<WorkloadSpec> workload;
  std::optional<Tick> horizon;  // default: 2 * hyperperiod + max W
  std::uint64_t seed = 0;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

std::vector<std::string> validate_scenario(const Scenario& sc);
Tick effective_horizon(const Scenario& sc);
PriorityMap priorities_for(const Scenario& sc);

/// Sorted raise times in [0, horizon). Sporadic workloads draw from a
/// generator seeded by the spec seed, or by `seed` when the spec has none.
std::vector<Tick> generate_workload(const WorkloadSpec& spec, Tick horizon,
                                    std::uint64_t seed);

struct TaskMetrics {
  std::uint64_t released = 0;
  std::uint64_t completed = 0;
  std::uint64_t misses = 0;
  std::uint64_t drops = 0;
  std::uint64_t notifications = 0;
  std::uint64_t unfinished = 0;
  Tick max_response = 0;
  double avg_response = 0.0;
};

struct LineMetrics {
  std::uint64_t raised = 0;
  std::uint64_t internalized = 0;
  std::uint64_t suppressed = 0;  // counter-only: never internalized
  std::uint64_t held = 0;        // still awaiting back-fill at the horizon
  Tick top_half = 0;
  LineState final_state = LineState::InEnvelope;
};

struct Metrics {
  std::map<std::string, TaskMetrics> tasks;
  std::map<std::uint32_t, LineMetrics> lines;
  std::vector<Alarm> alarms;
  Tick total_top_half = 0;
  std::uint64_t mask_updates = 0;
  std::uint64_t ipl_updates = 0;
  Tick horizon = 0;

  std::size_t alarm_count(AlarmKind kind) const;
  std::uint64_t total_misses() const;
};

std::string metrics_to_json(const Metrics& m);

struct RunResult {
  Trace trace;
  Metrics metrics;
};

/// Deterministic unit-tick simulation of the scenario.
///
/// Per tick: overdue jobs are finalized, due window timers fire (through the
/// timer line), monitors age, raises are applied in (irq priority desc, line
/// id) order and delivered lines are internalized, then the CPU runs one tick.
/// Throws ScenarioError before simulating when the scenario is invalid.
RunResult run_scenario(const Scenario& sc);

}  // namespace ooe

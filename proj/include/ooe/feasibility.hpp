#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ooe/engine.hpp"
#include "ooe/model.hpp"

namespace ooe {

// Release times per task (indexed like the task set), each sorted, at most
// one per tick.
using ReleasePattern = std::vector<std::vector<Tick>>;

enum class JobVerdict { Completed, Missed, Dropped, Unfinished };

const char* to_string(JobVerdict v);

struct JobOutcome {
  std::size_t task = 0;
  std::uint32_t seq = 0;
  Tick release = 0;
  Tick deadline = 0;
  JobVerdict verdict = JobVerdict::Unfinished;
  std::optional<Tick> finished;

  friend bool operator==(const JobOutcome&, const JobOutcome&) = default;
};

/// Independent unit-tick model of the engine restricted to delta_th = 0, no
/// IPL optimization and no bottom-half masking. Events at t < end are
/// delivered; the loop runs through tick `end` so late jobs get finalized.
std::vector<JobOutcome> simulate_pattern(const TaskSet& ts,
                                         const PriorityMap& priorities,
                                         const ReleasePattern& pattern,
                                         Tick end);

/// Synchronous periodic releases over [0, horizon).
ReleasePattern normal_pattern(const TaskSet& ts, Tick horizon);

struct NormalResult {
  bool schedulable = true;
  std::optional<JobOutcome> first_miss;
  std::vector<JobOutcome> jobs;
};

/// Default horizon is one hyperperiod.
NormalResult check_normal(const TaskSet& ts, const PriorityMap& priorities,
                          std::optional<Tick> horizon = std::nullopt);

struct Bounds {
  std::size_t max_tasks = 3;
  Tick max_horizon = 24;
  std::uint64_t max_patterns = 1'000'000;
};

class BoundsExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every superset of the task's normal pattern inside [0, horizon) with at
/// most one event per tick and at most n events in any (t - W, t]. The normal
/// pattern comes first. Throws BoundsExceeded past `limit` patterns.
std::vector<std::vector<Tick>> enumerate_task_patterns(const Task& task,
                                                       Tick horizon,
                                                       std::uint64_t limit);

struct FeasibilityResult {
  bool feasible = true;
  std::uint64_t patterns_checked = 0;
  // Set on a violation.
  std::optional<std::uint64_t> pattern_index;
  ReleasePattern pattern;
  std::vector<JobOutcome> jobs;
  std::optional<JobOutcome> offending;
};

/// Exhaustive out-of-envelope feasibility of the scenario's policy. A pattern
/// violates when a job misses its deadline (drops are sanctioned). Outside the
/// normal pattern, misses of notify-running tasks are tolerated. Horizon
/// defaults to the hyperperiod.
FeasibilityResult check_ooe_feasible(const Scenario& sc, Bounds bounds = {},
                                     std::optional<Tick> horizon = std::nullopt);

/// Tick through which pattern simulations run: horizon + max D.
Tick pattern_end(const TaskSet& ts, Tick horizon);

/// The scenario with its workload replaced by explicit raises for `pattern`.
Scenario pattern_scenario(const Scenario& sc, const ReleasePattern& pattern,
                          Tick horizon);

/// Per-job verdicts of an engine run, in the order used by simulate_pattern.
std::vector<JobOutcome> engine_outcomes(const Scenario& sc,
                                        const RunResult& run);

}  // namespace ooe

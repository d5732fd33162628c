#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace ooe {

// Abstract time in integer ticks.
using Tick = std::int64_t;

// Period of an exception-only task: it has no normal release pattern.
inline constexpr Tick kInfinite = std::numeric_limits<Tick>::max();

struct LineId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(LineId, LineId) = default;
};

// Reserved for the timer interrupt; never used by a device.
inline constexpr LineId kTimerLine{std::numeric_limits<std::uint32_t>::max()};

using Importance = std::uint32_t;
using Priority = std::int64_t;
using Rational = boost::rational<std::int64_t>;

enum class ResponseOption { ReleaseAll, NotifyRunning };

struct Task {
  std::string id;
  Tick wcet = 1;
  Tick period = 1;
  Tick deadline = 1;
  Importance importance = 0;
  LineId line;
  std::uint32_t envelope_n = 1;
  Tick envelope_w = 1;
  ResponseOption response = ResponseOption::ReleaseAll;

  bool exception_only() const { return period == kInfinite; }
};

enum class JobState { Released, Running, Preempted, Completed, Missed, Dropped };

bool is_final(JobState s);

struct Job {
  std::size_t task = 0;
  std::uint32_t seq = 0;  // 0-based; the trace shows seq + 1
  Tick release = 0;
  Tick abs_deadline = 0;
  Tick remaining = 0;
  JobState state = JobState::Released;
  bool out_of_envelope = false;
  // Set when a more important elevated task ran while this job waited.
  bool displaced_by_elevated = false;
  std::uint32_t notifications = 0;
  Tick interference = 0;
  std::optional<Tick> finished;
};

// Overrides apply to jobs with seq % modulus == residue, where modulus is the
// task's job count per hyperperiod.
struct JobPriorityOverride {
  std::uint32_t residue = 0;
  Priority priority = 0;
};

class PriorityMap {
 public:
  PriorityMap() = default;
  PriorityMap(std::vector<Priority> base,
              std::vector<std::vector<JobPriorityOverride>> overrides,
              std::vector<std::uint32_t> modulus);

  Priority priority_of(std::size_t task, std::uint32_t seq) const;
  Priority base(std::size_t task) const { return base_.at(task); }
  std::size_t size() const { return base_.size(); }

  const std::vector<std::vector<JobPriorityOverride>>& overrides() const {
    return overrides_;
  }
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }

 private:
  std::vector<Priority> base_;
  std::vector<std::vector<JobPriorityOverride>> overrides_;
  std::vector<std::uint32_t> modulus_;
};

struct TaskSet {
  std::vector<Task> tasks;
  // Explicit base priorities (unused under importance-monotonic assignment).
  std::vector<std::optional<Priority>> explicit_priority;
  std::vector<std::vector<JobPriorityOverride>> overrides;

  std::optional<std::size_t> index_of(const std::string& id) const;
  std::optional<std::size_t> task_on_line(LineId line) const;
};

// Dispatch rank of a job; the greater rank runs first. Jobs of elevated
// (out-of-envelope) tasks form a band above all others, ordered by importance.
struct JobRank {
  int band = 0;
  std::int64_t band_importance = 0;
  Priority priority = 0;
  std::int64_t id_order = 0;  // negated lexicographic rank of the task id
  std::int64_t seq_order = 0;  // negated job sequence number

  friend constexpr auto operator<=>(const JobRank&, const JobRank&) = default;
};

struct Violation {
  std::string task;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> problems;

  bool valid() const { return problems.empty(); }
  bool mentions(const std::string& text) const;
};

ValidationReport validate_task_set(const TaskSet& ts);

// Sum of C/T over tasks with a finite period.
Rational utilization(const TaskSet& ts);

// LCM of all finite periods; 1 when there are none.
Tick hyperperiod(const TaskSet& ts);

// Jobs per hyperperiod of one task (1 for exception-only tasks).
std::uint32_t jobs_per_hyperperiod(const TaskSet& ts, std::size_t task);

PriorityMap assign_importance_monotonic(const TaskSet& ts);
PriorityMap assign_explicit(const TaskSet& ts);

}  // namespace ooe
